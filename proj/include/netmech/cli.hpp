#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netmech {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFail = 1,
  kExitConfigError = 2,
};

/// Runs `netmech <verb> [flags]`; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the arguments after the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace netmech
