#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ctgi::text {

std::string to_lower(std::string_view s);

/// Lowercased maximal runs of ASCII letters and digits.
std::vector<std::string> words(std::string_view s);

/// Word-set Jaccard similarity over `words()`; 1.0 when both sets are empty.
double jaccard(std::string_view a, std::string_view b);

/// True if `needle` occurs as a contiguous run of whole words in `haystack`.
bool contains_words(const std::vector<std::string>& haystack, const std::vector<std::string>& needle);

/// Index of the first whole-word occurrence, or npos.
std::size_t find_words(const std::vector<std::string>& haystack, const std::vector<std::string>& needle);

/// Whitespace-separated token count.
std::size_t token_count(std::string_view s);

std::string trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// "a", "a and b", "a, b and c".
std::string join_natural(const std::vector<std::string>& parts);

} // namespace ctgi::text
