#pragma once

#include <iosfwd>

namespace volgs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `volgs` command line tool: 0 on success, 2 on usage
/// errors (bad flags, unreadable inputs), 1 on any other failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace volgs
