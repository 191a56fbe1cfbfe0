#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ctgi::io {

/// Writes to a sibling temp file then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Splits file content into lines; a trailing newline does not yield an empty line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

} // namespace ctgi::io
