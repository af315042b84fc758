#include <svmlab/random.hpp>
#include <svmlab/solvers.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>

namespace svmlab {

void Dataset::add(Point x, int label, double weight) {
  points.push_back(std::move(x));
  labels.push_back(label);
  weights.push_back(weight);
}

double Dataset::total_weight() const noexcept { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void Dataset::validate() const {
  if (points.empty()) throw InputError("dataset is empty");
  if (labels.size() != points.size() || weights.size() != points.size()) {
    throw InputError("dataset: points, labels and weights differ in length");
  }
  const Eigen::Index dim = points.front().size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) throw InputError("dataset: inconsistent point dimensions");
    if (labels[i] != 1 && labels[i] != -1) {
      throw InputError("dataset: label " + std::to_string(labels[i]) + " not in {-1, +1}");
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw InputError("dataset: weights must be finite and >= 0");
  }
  if (!(total_weight() > 0.0)) throw InputError("dataset: total weight must be positive");
}

std::string_view to_string(Surrogate s) noexcept {
  switch (s) {
    case Surrogate::hinge: return "hinge";
    case Surrogate::least_squares: return "least-squares";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("solver: lambda must be positive");
  if (!(tolerance > 0.0)) throw InputError("solver: tolerance must be positive");
  if (max_sweeps < 1) throw InputError("solver: max_sweeps must be >= 1");
}

namespace {

using PointKey = std::array<double, kMaxDim + 1>;

PointKey key_of(const Point& p) {
  PointKey k{};
  k[0] = static_cast<double>(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) k[i + 1] = p(i) == 0.0 ? 0.0 : p(i);  // fold -0.0
  return k;
}

// Distinct points in first-occurrence order plus, for each input, its index.
struct Deduplicated {
  std::vector<Point> points;
  std::vector<std::size_t> index_of;
};

Deduplicated deduplicate(std::span<const Point> points) {
  Deduplicated out;
  out.index_of.reserve(points.size());
  std::map<PointKey, std::size_t> seen;
  for (const Point& p : points) {
    auto [it, inserted] = seen.try_emplace(key_of(p), out.points.size());
    if (inserted) out.points.push_back(p);
    out.index_of.push_back(it->second);
  }
  return out;
}

}  // namespace

TrainedModel::TrainedModel(std::vector<Point> anchors, std::vector<double> coefficients, std::vector<int> labels,
                           KernelSpec kernel, Surrogate surrogate)
    : anchors_(std::move(anchors)),
      coefficients_(std::move(coefficients)),
      labels_(std::move(labels)),
      kernel_(kernel),
      surrogate_(surrogate) {
  if (coefficients_.size() != anchors_.size() || labels_.size() != anchors_.size()) {
    throw InputError("model: anchors, coefficients and labels differ in length");
  }
  if (!anchors_.empty()) dimension_ = anchors_.front().size();
  const Deduplicated d = deduplicate(anchors_);
  std::vector<double> net(d.points.size(), 0.0);
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (anchors_[i].size() != dimension_) throw InputError("model: inconsistent anchor dimensions");
    net[d.index_of[i]] += coefficients_[i] * labels_[i];
  }
  for (std::size_t u = 0; u < net.size(); ++u) {
    if (net[u] != 0.0) {
      support_.push_back(d.points[u]);
      beta_.push_back(net[u]);
    }
  }
}

double TrainedModel::predict(const Point& x) const {
  if (dimension_ != 0 && x.size() != dimension_) {
    throw InputError("predict: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(dimension_) + ")");
  }
  const double scale = -1.0 / (2.0 * kernel_.sigma() * kernel_.sigma());
  double g = 0.0;
  for (std::size_t j = 0; j < support_.size(); ++j) g += beta_[j] * std::exp(scale * (support_[j] - x).squaredNorm());
  return g;
}

std::vector<double> TrainedModel::predict(std::span<const Point> xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(xs[i]);
  return out;
}

double TrainedModel::rkhs_norm_squared() const {
  if (support_.empty()) return 0.0;
  const GramMatrix k = gram_matrix(support_, kernel_);
  const Eigen::Map<const Eigen::VectorXd> b(beta_.data(), static_cast<Eigen::Index>(beta_.size()));
  return std::max(0.0, b.dot(k.matrix() * b));
}

namespace {

// Rows of the weighted dataset after merging identical (x, y) pairs.
struct MergedRows {
  std::vector<Point> unique_points;
  std::vector<std::size_t> point_of;  // row -> unique point
  std::vector<int> labels;
  std::vector<double> weights;
  double total_weight = 0.0;
};

// Zero-weight rows have the box [0, 0] and are dropped.
MergedRows merge_rows(const Dataset& data) {
  std::vector<std::size_t> kept;
  std::vector<Point> points;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.weights[i] > 0.0) {
      kept.push_back(i);
      points.push_back(data.points[i]);
    }
  }
  const Deduplicated d = deduplicate(points);
  MergedRows m;
  m.unique_points = d.points;
  std::map<std::pair<std::size_t, int>, std::size_t> row_of;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t i = kept[k];
    const auto key = std::make_pair(d.index_of[k], data.labels[i]);
    auto [it, inserted] = row_of.try_emplace(key, m.labels.size());
    if (inserted) {
      m.point_of.push_back(d.index_of[k]);
      m.labels.push_back(data.labels[i]);
      m.weights.push_back(0.0);
    }
    m.weights[it->second] += data.weights[i];
  }
  m.total_weight = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
  return m;
}

// Pivoted Cholesky factor K ~ L L^T, stopped once every residual diagonal
// entry is at most `tolerance`. Row p of L is a feature vector of point p and
// |K - L L^T| <= tolerance entrywise since the residual is PSD.
Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& k, double tolerance) {
  const Eigen::Index n = k.rows();
  Eigen::VectorXd diag = k.diagonal();
  Eigen::MatrixXd l(n, std::min<Eigen::Index>(n, 64));
  Eigen::Index rank = 0;
  while (rank < n) {
    Eigen::Index p = 0;
    const double pivot = diag.maxCoeff(&p);
    if (pivot <= tolerance) break;
    if (rank == l.cols()) l.conservativeResize(n, std::min<Eigen::Index>(n, 2 * l.cols()));
    Eigen::VectorXd col = k.col(p);
    if (rank > 0) col.noalias() -= l.leftCols(rank) * l.row(p).head(rank).transpose();
    col /= std::sqrt(pivot);
    l.col(rank) = col;
    diag -= col.cwiseAbs2();
    diag(p) = 0.0;
    ++rank;
  }
  l.conservativeResize(n, rank);
  return l;
}

class HingeDualSolver {
 public:
  HingeDualSolver(const MergedRows& rows, const Eigen::MatrixXd& gram, const SolverConfig& config)
      : rows_(rows),
        k_(gram),
        config_(config),
        n_(rows.labels.size()),
        alpha_(n_, 0.0),
        upper_(n_),
        f_(Eigen::VectorXd::Zero(gram.rows())) {
    for (std::size_t i = 0; i < n_; ++i) upper_[i] = rows.weights[i] / (2.0 * config.lambda * rows.total_weight);
  }

  // Coordinate descent first; it settles easy problems in a few sweeps. When
  // it stalls, a smoothed Newton solve in the factored feature space produces
  // a point whose KKT residual is below the tolerance, and coordinate descent
  // on the exact Gram matrix resumes from there if anything is left.
  SolveStats run() {
    Rng rng(derive_seed(config_.seed, {tag_hash("svm/permutation")}));
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});

    SolveStats stats;
    bool converged = sweep(rng, std::min(kWarmSweeps, config_.max_sweeps), stats.sweeps);
    if (!converged) {
      smoothed_newton();
      refresh_margins();
      converged = max_violation() <= config_.tolerance;
    }
    if (!converged) converged = sweep(rng, config_.max_sweeps - stats.sweeps, stats.sweeps);

    stats.converged = converged;
    refresh_margins();
    stats.kkt_residual = max_violation();
    fill_objectives(stats);
    return stats;
  }

  const std::vector<double>& alpha() const noexcept { return alpha_; }

 private:
  static constexpr std::int64_t kRefreshPeriod = 64;
  static constexpr std::int64_t kWarmSweeps = 32;
  static constexpr double kFactorTolerance = 1e-14;
  static constexpr int kMaxNewtonIterations = 100;

  Eigen::Index point(std::size_t i) const { return static_cast<Eigen::Index>(rows_.point_of[i]); }

  double gradient(std::size_t i) const { return rows_.labels[i] * f_(point(i)) - 1.0; }

  double projected_gradient(std::size_t i) const {
    const double g = gradient(i);
    if (alpha_[i] <= 0.0) return std::min(g, 0.0);
    if (alpha_[i] >= upper_[i]) return std::max(g, 0.0);
    return g;
  }

  double max_violation() const {
    double v = 0.0;
    for (std::size_t i = 0; i < n_; ++i) v = std::max(v, std::abs(projected_gradient(i)));
    return v;
  }

  void move(std::size_t i, double new_alpha) {
    const double delta = new_alpha - alpha_[i];
    if (delta == 0.0) return;
    alpha_[i] = new_alpha;
    f_ += (delta * rows_.labels[i]) * k_.col(point(i));
  }

  // Exact minimization along one coordinate; Q_ii = k(x_i, x_i) = 1.
  void coordinate_step(std::size_t i) {
    const double g = gradient(i);
    if (g == 0.0) return;
    move(i, std::clamp(alpha_[i] - g, 0.0, upper_[i]));
  }

  void refresh_margins() {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k_.rows());
    for (std::size_t i = 0; i < n_; ++i) beta(point(i)) += alpha_[i] * rows_.labels[i];
    f_.noalias() = k_ * beta;
  }

  // Up to `budget` random-permutation sweeps; true once the KKT residual on
  // freshly recomputed margins is within tolerance.
  bool sweep(Rng& rng, std::int64_t budget, std::int64_t& sweeps) {
    for (std::int64_t s = 0; s < budget; ++s) {
      for (std::size_t i = n_; i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
      for (std::size_t i : order_) coordinate_step(i);
      ++sweeps;
      if (sweeps % kRefreshPeriod == 0) refresh_margins();
      if (max_violation() <= config_.tolerance) {
        refresh_margins();
        if (max_violation() <= config_.tolerance) return true;
      }
    }
    return false;
  }

  // With K ~ L L^T and u_i = y_i l_{p(i)}, the problem divided by 2 lambda is
  //   min_w 1/2 |w|^2 + sum_i C_i (1 - u_i.w)_+ .
  // The hinge is replaced by its Huber smoothing of width delta, which makes
  // the objective C^1 with Hessian I + sum_{0 < t_i < delta} (C_i / delta) u_i u_i^T
  // (t_i = 1 - u_i.w), and Newton runs along a decreasing sequence of widths.
  // The dual point alpha_i = C_i clamp(t_i / delta, 0, 1) then violates the
  // KKT conditions by at most delta plus the factorization error.
  void smoothed_newton() {
    const Eigen::MatrixXd l = pivoted_cholesky(k_, kFactorTolerance);
    const Eigen::Index r = l.cols();
    const Eigen::Index points = k_.rows();
    const double final_delta = 0.1 * config_.tolerance;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(points);
    for (std::size_t i = 0; i < n_; ++i) beta(point(i)) += alpha_[i] * rows_.labels[i];
    Eigen::VectorXd w = l.transpose() * beta;

    Eigen::VectorXd lw(points);
    std::vector<double> t(n_);
    auto update_margins = [&](const Eigen::VectorXd& v) {
      lw.noalias() = l * v;
      for (std::size_t i = 0; i < n_; ++i) t[i] = 1.0 - rows_.labels[i] * lw(point(i));
    };
    auto huber = [](double x, double delta) {
      if (x <= 0.0) return 0.0;
      return x < delta ? 0.5 * x * x / delta : x - 0.5 * delta;
    };
    auto objective = [&](const Eigen::VectorXd& v, double delta) {
      update_margins(v);
      double acc = 0.5 * v.squaredNorm();
      for (std::size_t i = 0; i < n_; ++i) acc += upper_[i] * huber(t[i], delta);
      return acc;
    };

    double delta = 1.0;
    for (;;) {
      delta = std::max(delta, final_delta);
      double value = objective(w, delta);
      std::vector<std::int8_t> zone(n_, 0);
      for (int it = 0; it < kMaxNewtonIterations; ++it) {
        Eigen::VectorXd slope = Eigen::VectorXd::Zero(points);
        Eigen::VectorXd curvature = Eigen::VectorXd::Zero(points);
        bool same_zones = true;
        for (std::size_t i = 0; i < n_; ++i) {
          const std::int8_t z = t[i] <= 0.0 ? 0 : (t[i] < delta ? 1 : 2);
          same_zones &= z == zone[i];
          zone[i] = z;
          const double d = z == 0 ? 0.0 : (z == 1 ? t[i] / delta : 1.0);
          slope(point(i)) += upper_[i] * d * rows_.labels[i];
          if (z == 1) curvature(point(i)) += upper_[i] / delta;
        }
        const Eigen::VectorXd grad = w - l.transpose() * slope;
        if (it > 0 && same_zones && grad.norm() <= 1e-12 * (1.0 + w.norm())) break;

        Eigen::MatrixXd hessian = Eigen::MatrixXd::Identity(r, r);
        std::vector<Eigen::Index> active;
        for (Eigen::Index p = 0; p < points; ++p) {
          if (curvature(p) > 0.0) active.push_back(p);
        }
        if (!active.empty()) {
          Eigen::MatrixXd scaled(static_cast<Eigen::Index>(active.size()), r);
          for (std::size_t a = 0; a < active.size(); ++a) {
            scaled.row(static_cast<Eigen::Index>(a)) = std::sqrt(curvature(active[a])) * l.row(active[a]);
          }
          hessian.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(hessian.selfadjointView<Eigen::Lower>());
        if (llt.info() != Eigen::Success) return;
        const Eigen::VectorXd direction = llt.solve(-grad);
        const double decrease = grad.dot(direction);
        if (!(decrease < 0.0)) break;

        double step = 1.0;
        Eigen::VectorXd trial = w + direction;
        double trial_value = objective(trial, delta);
        while (trial_value > value + 1e-4 * step * decrease && step > 1e-12) {
          step *= 0.5;
          trial = w + step * direction;
          trial_value = objective(trial, delta);
        }
        if (!(trial_value <= value)) {
          update_margins(w);
          break;
        }
        w = std::move(trial);
        value = trial_value;
      }
      update_margins(w);
      if (delta <= final_delta) break;
      delta *= 0.1;
    }

    for (std::size_t i = 0; i < n_; ++i) alpha_[i] = upper_[i] * std::clamp(t[i] / delta, 0.0, 1.0);
  }

  void fill_objectives(SolveStats& stats) const {
    const double lambda = config_.lambda;
    double norm2 = 0.0;
    double alpha_sum = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double margin = rows_.labels[i] * f_(static_cast<Eigen::Index>(rows_.point_of[i]));
      norm2 += alpha_[i] * margin;
      alpha_sum += alpha_[i];
      loss += rows_.weights[i] * std::max(0.0, 1.0 - margin);
    }
    norm2 = std::max(norm2, 0.0);
    stats.primal_objective = loss / rows_.total_weight + lambda * norm2;
    stats.dual_objective = 2.0 * lambda * alpha_sum - lambda * norm2;
    stats.duality_gap = stats.primal_objective - stats.dual_objective;
  }

  const MergedRows& rows_;
  const Eigen::MatrixXd& k_;
  const SolverConfig& config_;
  std::size_t n_;
  std::vector<double> alpha_;
  std::vector<double> upper_;
  Eigen::VectorXd f_;  // g at each distinct point
  std::vector<std::size_t> order_;
};

std::vector<Point> row_points(const MergedRows& rows) {
  std::vector<Point> out;
  out.reserve(rows.point_of.size());
  for (std::size_t u : rows.point_of) out.push_back(rows.unique_points[u]);
  return out;
}

}  // namespace

TrainingResult fit_svm(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config) {
  data.validate();
  config.validate();
  const MergedRows rows = merge_rows(data);
  const GramMatrix gram = gram_matrix(rows.unique_points, kernel);
  HingeDualSolver solver(rows, gram.matrix(), config);
  const SolveStats stats = solver.run();
  return {TrainedModel(row_points(rows), solver.alpha(), rows.labels, kernel, Surrogate::hinge), stats};
}

TrainedModel train_svm(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config) {
  TrainingResult r = fit_svm(data, kernel, config);
  if (!r.stats.converged) {
    throw ConvergenceError("train_svm: no convergence after " + std::to_string(r.stats.sweeps) +
                               " sweeps (KKT residual " + std::to_string(r.stats.kkt_residual) + ", duality gap " +
                               std::to_string(r.stats.duality_gap) + ")",
                           r.stats.kkt_residual, r.stats.duality_gap);
  }
  return std::move(r.model);
}

TrainingResult fit_krr(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config) {
  data.validate();
  config.validate();
  const Deduplicated d = deduplicate(data.points);
  std::vector<double> mass(d.points.size(), 0.0);
  std::vector<double> target(d.points.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    mass[d.index_of[i]] += data.weights[i];
    target[d.index_of[i]] += data.weights[i] * data.labels[i];
  }
  std::vector<Point> anchors;
  std::vector<double> w;
  std::vector<double> ybar;
  for (std::size_t u = 0; u < d.points.size(); ++u) {
    if (mass[u] > 0.0) {
      anchors.push_back(d.points[u]);
      w.push_back(mass[u]);
      ybar.push_back(target[u] / mass[u]);
    }
  }
  const double total = data.total_weight();
  const auto m = static_cast<Eigen::Index>(anchors.size());
  const GramMatrix gram = gram_matrix(anchors, kernel);

  Eigen::VectorXd root_w(m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    root_w(i) = std::sqrt(w[i]);
    rhs(i) = root_w(i) * ybar[i];
  }
  Eigen::MatrixXd system = root_w.asDiagonal() * gram.matrix() * root_w.asDiagonal();
  system.diagonal().array() += config.lambda * total;

  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("train_krr: regularized system is not positive definite");
  Eigen::VectorXd gamma = llt.solve(rhs);
  // One step of iterative refinement keeps the residual small for tiny lambda.
  gamma += llt.solve(rhs - system * gamma);

  const double rhs_norm = rhs.norm();
  const double residual = (system * gamma - rhs).norm() / (rhs_norm > 0.0 ? rhs_norm : 1.0);

  std::vector<double> coefficients(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) coefficients[i] = root_w(i) * gamma(i);
  TrainedModel model(std::move(anchors), std::move(coefficients), std::vector<int>(static_cast<std::size_t>(m), 1), kernel,
                     Surrogate::least_squares);

  SolveStats stats;
  stats.sweeps = 1;
  stats.kkt_residual = residual;
  stats.converged = residual <= 1e-8;
  stats.primal_objective = least_squares_objective(model, data, config.lambda);
  stats.dual_objective = stats.primal_objective;
  return {std::move(model), stats};
}

TrainedModel train_krr(const Dataset& data, const KernelSpec& kernel, const SolverConfig& config) {
  TrainingResult r = fit_krr(data, kernel, config);
  if (!r.stats.converged) {
    throw NumericalError("train_krr: relative residual " + std::to_string(r.stats.kkt_residual) + " exceeds 1e-8");
  }
  return std::move(r.model);
}

double hinge_objective(const TrainedModel& model, const Dataset& data, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    loss += data.weights[i] * std::max(0.0, 1.0 - data.labels[i] * model.predict(data.points[i]));
  }
  return loss / data.total_weight() + lambda * model.rkhs_norm_squared();
}

double least_squares_objective(const TrainedModel& model, const Dataset& data, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = model.predict(data.points[i]) - data.labels[i];
    loss += data.weights[i] * r * r;
  }
  return loss / data.total_weight() + lambda * model.rkhs_norm_squared();
}

}  // namespace svmlab
