#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ergostab {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInternal = 3;

/// Runs the command line `args` (program name excluded). Reports go to
/// `out`, diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Same for a C-style argv.
int cli_main(int argc, const char* const* argv);

}  // namespace ergostab
