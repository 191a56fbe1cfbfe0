#include "ctgi/prompt.hpp"

#include <vector>

namespace ctgi::prompt {

namespace {

struct Piece {
    bool placeholder;
    std::string text;
};

std::vector<Piece> split(std::string_view tmpl)
{
    std::vector<Piece> pieces;
    std::string literal;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const auto name = tmpl.substr(i + 1, close - i - 1);
                if (!name.empty() && name.find_first_of("{ \n") == std::string_view::npos) {
                    if (!literal.empty()) pieces.push_back({false, std::move(literal)});
                    literal.clear();
                    pieces.push_back({true, std::string(name)});
                    i = close + 1;
                    continue;
                }
            }
        }
        literal += tmpl[i++];
    }
    if (!literal.empty()) pieces.push_back({false, std::move(literal)});
    return pieces;
}

} // namespace

std::string render(std::string_view tmpl, const Vars& vars)
{
    std::string out;
    for (const auto& p : split(tmpl)) {
        if (!p.placeholder) {
            out += p.text;
            continue;
        }
        auto it = vars.find(p.text);
        out += it == vars.end() ? "{" + p.text + "}" : it->second;
    }
    return out;
}

std::optional<Vars> match(std::string_view tmpl, std::string_view text)
{
    const auto pieces = split(tmpl);
    Vars vars;
    std::size_t pos = 0;
    const std::string* pending = nullptr;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        if (p.placeholder) {
            if (pending) return std::nullopt; // adjacent placeholders are ambiguous
            pending = &p.text;
            continue;
        }
        const bool last = i + 1 == pieces.size();
        std::size_t at;
        if (!pending) {
            if (text.substr(pos, p.text.size()) != p.text) return std::nullopt;
            at = pos;
        } else if (last) {
            if (text.size() < pos + p.text.size()) return std::nullopt;
            at = text.size() - p.text.size();
            if (text.substr(at) != p.text) return std::nullopt;
        } else {
            at = text.find(p.text, pos);
            if (at == std::string_view::npos) return std::nullopt;
        }
        if (pending) {
            vars[*pending] = std::string(text.substr(pos, at - pos));
            pending = nullptr;
        }
        pos = at + p.text.size();
    }
    if (pending) {
        vars[*pending] = std::string(text.substr(pos));
        pos = text.size();
    }
    if (pos != text.size()) return std::nullopt;
    return vars;
}

} // namespace ctgi::prompt
