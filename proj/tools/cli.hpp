#pragma once

#include <iosfwd>

namespace zsx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

// Entry point of the `zsx` tool. Reports go to --output or `out`; diagnostics
// go to `err` as a single line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zsx::cli
