#pragma once

#include <svmlab/core.hpp>
#include <svmlab/solvers.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace svmlab {

/// Bad command line. The message is meant for the user.
class UsageError : public InputError {
 public:
  using InputError::InputError;
};

/// `--help` was requested; what() holds the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  /// Empty for `verify` means every built-in problem.
  std::string problem;
  double p = 1.0;
  double sigma = 0.2;
  double lambda = 1e-4;
  std::vector<std::int64_t> n_grid;
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  bool noiseless = false;
  double tolerance = 1e-6;
  std::int64_t max_sweeps = 10000;
  Surrogate surrogate = Surrogate::hinge;
  std::int64_t train_side = 100;
  std::int64_t test_side = 500;
  /// 0 uses every hardware thread; results do not depend on it.
  unsigned threads = 0;
};

/// Parses arguments after the program name. Fills subcommand-specific defaults:
///   rates      power-gap-1d, sigma 0.2, lambda 1e-4, out rates.csv
///   levelsets  sine-2d,      sigma 0.2, lambda 1e-3, out levelsets.csv
///   compare    gap-step-1d,  sigma 0.1, lambda 1e-6, out compare.csv
///   verify     all problems, out verify.csv
/// Throws UsageError on unknown flags, bad values or a missing subcommand.
RunConfig parse_args(const std::vector<std::string>& args);

/// Runs a parsed configuration, writing result files and a short log.
/// Returns the process exit code (for verify: the violation count, capped at 125).
int run(const RunConfig& config, std::ostream& log);

/// Entry point used by the executable: parse, run, map errors to exit codes
/// (2 for usage errors, 1 for other failures).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `<stem><suffix><ext>` next to `path`, e.g. rates.csv -> rates_summary.csv.
std::filesystem::path sibling_path(const std::filesystem::path& path, const std::string& suffix);

}  // namespace svmlab
