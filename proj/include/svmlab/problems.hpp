#pragma once

#include <svmlab/core.hpp>
#include <svmlab/random.hpp>
#include <svmlab/solvers.hpp>

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svmlab {

enum class ProblemKind { power_gap_1d, power_full_1d, sine_2d, gap_step_1d };

std::string_view to_string(ProblemKind kind) noexcept;
/// Throws InputError for unknown names.
ProblemKind parse_problem_kind(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
};

/// Piecewise-constant conditional mean on the gap-step support [0,1] u [2,3].
/// levels[k] applies on [breaks[k-1], breaks[k]) with breaks sorted.
struct StepProfile {
  std::vector<double> breaks;
  std::vector<double> levels;

  /// 0.05 on [0, 0.5), 0.95 on [0.5, 1], -0.95 on [2, 3]: a jump of eta that
  /// does not change its sign inside a support piece.
  static StepProfile default_profile();
};

/// Nodes and masses of a deterministic quadrature rule for the input marginal.
struct Quadrature {
  std::vector<Point> nodes;
  std::vector<double> masses;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Synthetic binary classification distribution with known conditional mean.
///
/// Input marginals are uniform on a union of intervals (1-D) or on an
/// axis-aligned square (2-D). Labels satisfy P(Y = 1 | X = x) = (1 + eta(x)) / 2.
class Problem {
 public:
  Problem(ProblemKind kind, std::string name, int dimension, std::vector<Interval> support,
          std::function<double(const Point&)> eta);

  ProblemKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return dimension_; }
  /// 1-D: disjoint sorted support intervals. 2-D: the square is support()[0]^2.
  std::span<const Interval> support() const noexcept { return support_; }

  double eta(const Point& x) const;
  /// Bayes classifier sign(eta) with sign(0) = +1.
  int bayes(const Point& x) const { return sign_of(eta(x)); }
  double prob_positive(const Point& x) const { return 0.5 * (1.0 + eta(x)); }
  double density(const Point& x) const;
  bool in_support(const Point& x) const;

  /// Margin condition P(0 < |eta| < t) <= c t^p; p may be +infinity.
  double margin_exponent() const noexcept { return margin_exponent_; }
  double margin_constant() const noexcept { return margin_constant_; }
  /// eta0 > 0 when |eta| >= eta0 almost surely, otherwise 0.
  double hard_margin() const noexcept { return hard_margin_; }
  /// Closed-form P(0 < |eta(X)| < t), when one is known.
  std::optional<double> margin_cdf_closed_form(double t) const;

  /// Positions where eta jumps inside the support (1-D only).
  const std::vector<double>& discontinuities() const noexcept { return discontinuities_; }
  /// Maximal intervals of the support on which f* equals `label` (1-D only).
  std::vector<Interval> decision_intervals(int label) const;

  /// 1-D marginal CDF and its inverse.
  double cdf(double x) const;
  double quantile(double u) const;
  /// rho_X([lo, hi]) in 1-D.
  double interval_mass(double lo, double hi) const;

  void set_margin(double exponent, double constant, double hard_margin);
  void set_discontinuities(std::vector<double> points) { discontinuities_ = std::move(points); }
  void set_closed_form_cdf(std::function<double(double)> f) { closed_cdf_ = std::move(f); }

 private:
  ProblemKind kind_;
  std::string name_;
  int dimension_;
  std::vector<Interval> support_;
  std::function<double(const Point&)> eta_;
  double total_length_ = 0.0;
  double margin_exponent_ = std::numeric_limits<double>::infinity();
  double margin_constant_ = 1.0;
  double hard_margin_ = 0.0;
  std::vector<double> discontinuities_;
  std::function<double(double)> closed_cdf_;
};

struct ProblemOptions {
  double p = 1.0;
  bool noiseless = false;
  StepProfile step = StepProfile::default_profile();
};

/// Built-in problems:
///  - power-gap-1d:  X uniform on [-1,-0.1] u [0.1,1], eta = sign(x)|x|^p
///  - power-full-1d: X uniform on [-1,1], same eta
///  - sine-2d:       X uniform on [0,1]^2, eta = clamp(2 x2 - 0.5 sin(2 pi x1) - 1);
///                   the noiseless variant uses sign of the same expression
///  - gap-step-1d:   X uniform on [0,1] u [2,3], piecewise-constant eta
Problem make_problem(ProblemKind kind, const ProblemOptions& options = {});
Problem make_problem(std::string_view name, double p, bool noiseless);

/// n i.i.d. draws with unit weights.
Dataset sample(const Problem& problem, std::size_t n, Rng& rng);

/// Each lattice point x contributes (x, +1, (1+eta)/2) and (x, -1, (1-eta)/2).
/// 1-D: m points at the midpoint quantiles (k + 1/2)/m. 2-D: the m x m
/// cell-centred lattice.
Dataset curated_weighted_dataset(const Problem& problem, std::size_t side);

/// 1-D: n nodes x_k = quantile(k/n), each of mass 1/n, so that consecutive
/// nodes enclose mass 1/n and [x_n, inf) carries the last 1/n. 2-D: side x side
/// cell-centred lattice with masses 1/side^2.
Quadrature quadrature(const Problem& problem, std::size_t resolution);
/// Default resolution: 10^4 nodes in 1-D, 500^2 in 2-D.
Quadrature default_quadrature(const Problem& problem);
/// Approximately `nodes` quadrature points (2-D rounds to a square lattice).
Quadrature quadrature_with_nodes(const Problem& problem, std::size_t nodes);

using Classifier = std::function<int(const Point&)>;

/// E[|eta(X)| 1{f(X) != f*(X)}] by quadrature.
double excess_risk(const Problem& problem, const Classifier& f, const Quadrature& quad);
double excess_risk(const Problem& problem, const Classifier& f);
/// Same, with g evaluated at the quadrature nodes and f = sign(g).
double excess_risk_from_scores(const Problem& problem, const Quadrature& quad, std::span<const double> g);
/// P(f(X) != f*(X)), which upper-bounds the excess risk.
double disagreement_mass(const Problem& problem, const Quadrature& quad, std::span<const double> g);

/// P(0 < |eta(X)| < t): closed form where known, otherwise quadrature.
double margin_cdf(const Problem& problem, double t);

}  // namespace svmlab
