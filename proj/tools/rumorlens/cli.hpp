#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rumorlens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDiverged = 3;

/// Runs the command line `args` (args[0] is the program name). Results go to
/// `out`; diagnostics, per-epoch loss lines and the seed/config digest go to
/// `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rumorlens::cli
