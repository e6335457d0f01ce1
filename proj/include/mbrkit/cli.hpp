#ifndef MBRKIT_CLI_HPP_
#define MBRKIT_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace mbrkit {

// Exit statuses of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

// `mbrkit decode` with `args` excluding the program and subcommand names.
// Decoded outputs go to `out` (or --output); the run summary and profile
// go to `err` (or --report-file).
int run_decode(const std::vector<std::string>& args, std::istream& in,
               std::ostream& out, std::ostream& err);

// `mbrkit selftest [--only NAME]...`
int run_selftest(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err);

// Subcommand dispatch; a leading option means "decode".
int run_main(int argc, const char* const* argv);

}  // namespace mbrkit

#endif  // MBRKIT_CLI_HPP_
