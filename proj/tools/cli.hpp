#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cover::cli {

/// Runs one command line (without the program name). Primary output goes to
/// `out`, diagnostics to `err`. Returns 0 ok, 2 usage, 3 domain, 4 I/O.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitIo = 4;

}  // namespace cover::cli
