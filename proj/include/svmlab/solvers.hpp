#pragma once

#include <svmlab/core.hpp>
#include <svmlab/kernel.hpp>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace svmlab {

/// Weighted labeled sample (x_i, y_i, w_i), y_i in {-1, +1}, w_i >= 0.
struct Dataset {
  std::vector<Point> points;
  std::vector<int> labels;
  std::vector<double> weights;

  void add(Point x, int label, double weight = 1.0);
  std::size_t size() const noexcept { return points.size(); }
  double total_weight() const noexcept;
  /// Throws InputError unless lengths agree, labels are +-1, weights are
  /// finite and nonnegative with positive sum, and dimensions are consistent.
  void validate() const;
};

enum class Surrogate { hinge, least_squares };

std::string_view to_string(Surrogate s) noexcept;

struct SolverConfig {
  double lambda = 1e-4;
  /// Maximum projected-gradient (KKT) violation accepted at termination.
  double tolerance = 1e-6;
  /// One sweep is one pass over every dual coordinate.
  std::int64_t max_sweeps = 10000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// g(x) = sum_i alpha_i y_i k(x_i, x).
///
/// For least-squares models the labels are absorbed into the coefficients and
/// every stored label is +1.
class TrainedModel {
 public:
  TrainedModel(std::vector<Point> anchors, std::vector<double> coefficients, std::vector<int> labels,
               KernelSpec kernel, Surrogate surrogate);

  const std::vector<Point>& anchors() const noexcept { return anchors_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  Surrogate surrogate() const noexcept { return surrogate_; }
  Eigen::Index dimension() const noexcept { return dimension_; }

  double predict(const Point& x) const;
  std::vector<double> predict(std::span<const Point> xs) const;
  /// sign(predict(x)) with sign(0) = +1.
  int classify(const Point& x) const { return sign_of(predict(x)); }

  /// ||g||_H^2 = beta^T K beta with beta_i = alpha_i y_i.
  double rkhs_norm_squared() const;

 private:
  std::vector<Point> anchors_;
  std::vector<double> coefficients_;
  std::vector<int> labels_;
  KernelSpec kernel_;
  Surrogate surrogate_;
  Eigen::Index dimension_ = 0;
  // Compact expansion: distinct anchors carrying a nonzero net coefficient.
  std::vector<Point> support_;
  std::vector<double> beta_;
};

struct SolveStats {
  std::int64_t sweeps = 0;
  /// Hinge: max projected-gradient violation. Least squares: relative residual.
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  bool converged = false;
};

struct TrainingResult {
  TrainedModel model;
  SolveStats stats;
};

/// Penalized hinge-loss SVM without intercept:
///
///   min_g (1/W) sum_i w_i max(0, 1 - y_i g(x_i)) + lambda ||g||_H^2,   W = sum_i w_i.
///
/// Dividing by 2 lambda gives the classical C-SVM primal with per-sample cost
/// C_i = w_i / (2 lambda W); its dual is
///
///   max_alpha sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j k(x_i, x_j),
///   0 <= alpha_i <= w_i / (2 lambda W),
///
/// with g = sum_i alpha_i y_i k(x_i, .). There is no equality constraint since
/// there is no offset. Rows sharing (x, y) are merged first by summing their
/// weights, which leaves both problems unchanged; zero-weight rows are dropped.
/// The dual is solved by coordinate descent over random-permutation sweeps.
/// When a short warm start does not converge, a Newton method on a Huber
/// smoothing of the primal (in the feature space of a pivoted Cholesky factor
/// of K, with the smoothing shrunk to the tolerance) supplies a near-optimal
/// point that coordinate descent then polishes. Objectives in SolveStats are on the
/// primal scale (dual value = 2 lambda sum alpha - lambda ||g||^2), so the
/// duality gap is bounded by the KKT tolerance.
///
/// Never throws on non-convergence; check stats.converged.
TrainingResult fit_svm(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config);

/// fit_svm, throwing ConvergenceError when the sweep budget runs out.
TrainedModel train_svm(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config);

/// Weighted kernel ridge regression
///
///   min_g (1/W) sum_i w_i (g(x_i) - y_i)^2 + lambda ||g||_H^2.
///
/// Rows at the same point are merged into (x, W_x, ybar_x); with D = diag(W_x)
/// the coefficients solve (D K + lambda W I) beta = D ybar, computed through the
/// symmetric form (D^1/2 K D^1/2 + lambda W I) gamma = D^1/2 ybar.
TrainingResult fit_krr(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config);

/// fit_krr, throwing NumericalError when the relative residual exceeds 1e-8.
TrainedModel train_krr(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config);

/// Primal hinge objective of a model on a dataset.
double hinge_objective(const TrainedModel& model, const Dataset& data, double lambda);

/// Weighted regularized least-squares objective of a model on a dataset.
double least_squares_objective(const TrainedModel& model, const Dataset& data, double lambda);

}  // namespace svmlab
