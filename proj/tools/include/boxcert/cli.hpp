#pragma once

// Command-line frontend. Everything lives in a library so tests can drive
// run() with an argument vector and captured streams.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace boxcert::cli {

/// Process exit codes. Verification statuses map onto 0 / 1 / 2.
enum ExitCode : int {
  kOk = 0,
  kFalsified = 1,  // also: infeasible optimization, failed selftest case
  kUnknown = 2,    // also: optimization budget exhausted, diverged tube
  kUsage = 3,
  kInput = 4,      // unreadable or malformed input file
  kInternal = 5,
};

/// Runs one command. `args` excludes the program name. The result document
/// goes to `out` (or to --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Help text of one command ("" for the top level).
std::string help_text(const std::string& command);

/// Every long flag of a command, as listed in the flag table.
std::vector<std::string> flag_names(const std::string& command);

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Writes the shipped fixture corpus (graphs, specs, bundles, manifest) into
/// `dir`. Every expectation in the manifest is computed by a brute-force
/// oracle before it is written.
void write_fixture_corpus(const std::filesystem::path& dir);

/// Directory the selftest reads when --fixtures is not given.
std::filesystem::path default_fixture_dir();

}  // namespace boxcert::cli
