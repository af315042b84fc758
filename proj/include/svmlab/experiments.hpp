#pragma once

#include <svmlab/analysis.hpp>
#include <svmlab/contour.hpp>
#include <svmlab/problems.hpp>
#include <svmlab/solvers.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace svmlab {

/// One (n, trial) record of a learning-rate experiment.
struct RateRow {
  std::int64_t n = 0;
  std::int64_t trial = 0;
  /// Seed of the trial's sampling stream.
  std::uint64_t seed = 0;
  double excess_risk = 0.0;
  double surrogate_excess = 0.0;
  bool zero_error = false;
  bool converged = false;
  /// Certified Lipschitz constant ||g||_H / sigma of the trained model.
  double lipschitz = 0.0;
  /// Quadrature mass where sign(g) != f*.
  double disagreement = 0.0;
};

struct RateTable {
  std::vector<RateRow> rows;

  /// Throws InputError on negative risks, non-positive n or duplicate (n, trial).
  void validate() const;
};

/// Powers of two from 16 to 1024.
std::vector<std::int64_t> default_n_grid();

struct RateConfig {
  double sigma = 0.2;
  double lambda = 1e-4;
  std::vector<std::int64_t> n_grid = default_n_grid();
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  std::int64_t max_sweeps = 10000;
  Surrogate surrogate = Surrogate::hinge;
  std::size_t quadrature_nodes = 10000;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// For every (n, trial): sample n points from stream (seed, trial, n), train,
/// and measure the excess risk on the quadrature. Rows are ordered by (n, trial)
/// and do not depend on the thread count. Non-converged fits are kept with
/// converged = false.
RateTable run_rate_experiment(const Problem& problem, const RateConfig& config);

struct RateSummary {
  std::int64_t n = 0;
  std::int64_t trials = 0;
  double mean = 0.0;
  /// One standard deviation over trials.
  double stddev = 0.0;
  double median = 0.0;
  double zero_fraction = 0.0;
  double mean_surrogate = 0.0;
};

std::vector<RateSummary> summarize(const RateTable& table);

struct RateFit {
  /// Fitted c in mean excess ~ exp(-c n).
  double c_hat = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  /// Sizes n >= n_min dropped because every trial classified perfectly.
  std::vector<std::int64_t> perfect_ns;
};

/// Least-squares fit of log(mean excess) against n over n >= n_min. Sizes
/// with zero mean are dropped and reported in perfect_ns; fewer than three
/// remaining sizes throws InputError.
RateFit fit_exponential_rate(const RateTable& table, std::int64_t n_min);

struct Proposition1Audit {
  std::size_t audited = 0;
  std::size_t violations = 0;
  /// Smallest ratio surrogate_excess / threshold over audited rows.
  double min_ratio = 0.0;
};

/// For every row whose model misclassifies a quadrature node, checks that its
/// surrogate excess is at least proposition1_threshold at G = max(lipschitz, 1/r).
Proposition1Audit audit_proposition1(const Problem& problem, const RateTable& table);

/// Sampled g on a lattice with its zero level lines.
struct LevelGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  /// g at (xs[i], ys[j]) stored at j * xs.size() + i.
  std::vector<double> g;
  std::vector<Polyline> lines;
  /// Mass of {sign g != f*}, the bias proxy bounding the excess risk.
  double symmetric_difference = 0.0;
  double excess_risk = 0.0;
  SolveStats stats;
};

struct LevelsetConfig {
  double sigma = 0.2;
  double lambda = 1e-3;
  std::size_t train_side = 100;
  std::size_t test_side = 500;
  double tolerance = 1e-6;
  std::int64_t max_sweeps = 10000;
  std::uint64_t seed = 0;
};

/// Evaluates g on the test_side x test_side cell-centred lattice of a 2-D problem.
LevelGrid level_grid(const Problem& problem, const std::function<double(const Point&)>& g, std::size_t test_side);

/// Trains a hinge SVM on the curated lattice of side train_side and samples it.
LevelGrid run_levelset_experiment(const Problem& problem, const LevelsetConfig& config);

struct ComparisonConfig {
  double sigma = 0.1;
  double lambda = 1e-6;
  std::size_t train_side = 100;
  std::size_t quadrature_nodes = 10000;
  double tolerance = 1e-6;
  std::int64_t max_sweeps = 10000;
  std::uint64_t seed = 0;
};

struct SurrogateReport {
  Surrogate surrogate = Surrogate::hinge;
  /// Quadrature mass where sign(g) = f*.
  double sign_agreement = 0.0;
  /// max |g| - 1 over the support quadrature.
  double overshoot = 0.0;
  /// Sign changes of g between neighbouring nodes where f* keeps its sign.
  std::int64_t spurious_sign_changes = 0;
  /// Largest distance from a disagreeing node to the nearest eta discontinuity
  /// (0 when there is no disagreement).
  double max_disagreement_distance = 0.0;
  SolveStats stats;
  std::vector<double> g;
};

struct ComparisonReport {
  Quadrature quadrature;
  std::vector<double> eta;
  SurrogateReport hinge;
  SurrogateReport least_squares;
};

/// Hinge and least-squares fits on the same curated 1-D lattice.
ComparisonReport run_surrogate_comparison(const Problem& problem, const ComparisonConfig& config);

SurrogateReport surrogate_report(const Problem& problem, const Quadrature& quad, std::vector<double> g,
                                 Surrogate surrogate);

/// One numerical check. Bounds compare lhs >= rhs; residual checks compare
/// lhs <= rhs; exact-value checks compare lhs against rhs.
struct CheckRecord {
  std::string check;
  std::string problem;
  std::int64_t instance = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct VerifyConfig {
  /// Random functions per problem and check.
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  /// Accepted residual of the risk-difference identity.
  double identity_tolerance = 1e-6;
  std::size_t quadrature_nodes_1d = 10000;
  std::size_t quadrature_side_2d = 200;
};

/// Runs the inequality suite on each problem: risk-difference identity, weak
/// and hard calibration bounds, the Lipschitz lower bound on the weak deviation,
/// the perfect-classification threshold, and the well-behaved region checks.
/// Problem-independent rows (constant and tail checks) come first.
std::vector<CheckRecord> run_verification_suite(const std::vector<Problem>& problems, const VerifyConfig& config);

}  // namespace svmlab
