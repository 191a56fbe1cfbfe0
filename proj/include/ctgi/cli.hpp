#pragma once

#include <iosfwd>
#include <string>

namespace ctgi::cli {

/// Runs one `ctgi` command line. Returns 0 on success, 1 on a domain error
/// (its name is printed to `err`), 2 on a usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version();

} // namespace ctgi::cli
