#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace graspkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

/// Run one command line, `args` excluding the program name. Reports and
/// summaries go to `out`, diagnostics to `err`. Log verbosity follows the
/// GRASPKIT_LOG environment variable (error, warn, info, debug).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace graspkit::cli
