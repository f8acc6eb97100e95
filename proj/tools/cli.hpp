#ifndef FFPC_TOOLS_CLI_HPP
#define FFPC_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ffpc::cli
{
enum ExitCode
{
    kOk = 0,
    kUsage = 1,
    kInfeasible = 2,
    kNumerical = 3,
};

/// Run the command line `args` (without the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace ffpc::cli

#endif
