#include "ctgi/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace ctgi::text {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

} // namespace

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> words(std::string_view s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_alnum(c)) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double jaccard(std::string_view a, std::string_view b)
{
    const auto wa = words(a);
    const auto wb = words(b);
    const std::set<std::string> sa(wa.begin(), wa.end());
    const std::set<std::string> sb(wb.begin(), wb.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& w : sa) common += sb.count(w);
    const std::size_t uni = sa.size() + sb.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

std::size_t find_words(const std::vector<std::string>& haystack, const std::vector<std::string>& needle)
{
    if (needle.empty() || needle.size() > haystack.size()) return std::string::npos;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end());
    return it == haystack.end() ? std::string::npos : static_cast<std::size_t>(it - haystack.begin());
}

bool contains_words(const std::vector<std::string>& haystack, const std::vector<std::string>& needle)
{
    return find_words(haystack, needle) != std::string::npos;
}

std::size_t token_count(std::string_view s)
{
    std::size_t count = 0;
    bool in_token = false;
    for (char c : s) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::string join_natural(const std::vector<std::string>& parts)
{
    if (parts.empty()) return {};
    if (parts.size() == 1) return parts.front();
    std::vector<std::string> head(parts.begin(), parts.end() - 1);
    return join(head, ", ") + " and " + parts.back();
}

} // namespace ctgi::text
