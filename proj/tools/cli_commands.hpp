/**
 * @file cli_commands.hpp
 * @brief Command-line front end: argument parsing, subcommand dispatch and
 *        report output, callable in-process for tests.
 */
#pragma once

#include <complex>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qexp::cli {

/// Stable exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kThreshold = 1, kArgument = 2, kNumerical = 3 };

/// Runs the CLI with the given arguments (argv[0] included). Records go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a+bi", "a-bi", "a", "bi", "i" or "a,b". Returns nothing on malformed input.
std::optional<std::complex<double>> parse_complex(const std::string& text);

/// "6" or "2..64" (even values only). Throws std::invalid_argument when malformed.
std::vector<int> parse_n_range(const std::string& text);

/// key=value lines; blank lines and lines starting with '#' are ignored.
/// Throws std::invalid_argument on a malformed line.
std::map<std::string, std::string> read_config(std::istream& in);

}  // namespace qexp::cli
