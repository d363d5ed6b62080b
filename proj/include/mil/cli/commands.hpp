#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mil::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `mil` tool. args excludes the program name.
// Returns 0 on success, 2 on a usage error and 1 on any runtime failure (with
// a diagnostic on err).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace mil::cli
