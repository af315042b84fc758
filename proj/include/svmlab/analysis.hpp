#pragma once

#include <svmlab/core.hpp>
#include <svmlab/problems.hpp>
#include <svmlab/random.hpp>
#include <svmlab/solvers.hpp>

#include <functional>
#include <span>
#include <vector>

namespace svmlab {

/// Values v_i carried by atoms of mass m_i (sum m_i = 1).
struct WeightedValues {
  std::vector<double> values;
  std::vector<double> masses;

  /// Throws InputError unless lengths agree, masses >= 0 and sum to 1 +- 1e-9.
  void validate() const;
};

/// Weak-L^p (Lorentz) quasi-norm sup_{t>0} t P(|f| > t)^{1/p}.
///
/// For a discrete measure the supremum is approached from below each atom
/// value, so it equals max_k |v|_(k) P(|f| >= |v|_(k))^{1/p}. p = +inf gives the
/// essential supremum.
double lorentz_norm(const WeightedValues& f, double p);

/// (sum m_i |v_i|^p)^{1/p}; p = +inf gives the essential supremum.
double lp_norm(const WeightedValues& f, double p);

/// h(q) = prob_pos (1 - q)_+ + (1 - prob_pos)(1 + q)_+, the conditional hinge risk.
double pointwise_hinge_risk(double prob_pos, double q);

/// Projection of R onto [-1, 1].
double clamp_pm1(double t);

using ScoreFunction = std::function<double(const Point&)>;

/// R_S(g) = E[h_{P(Y=1|X)}(g(X))] from g evaluated at the quadrature nodes.
double surrogate_risk(const Problem& problem, const Quadrature& quad, std::span<const double> g);
/// R_S(g) - R_S(g*) with g* = f* = sign(eta).
double surrogate_excess(const Problem& problem, const Quadrature& quad, std::span<const double> g);
double surrogate_excess(const Problem& problem, const ScoreFunction& g, const Quadrature& quad);
double surrogate_excess(const Problem& problem, const ScoreFunction& g);

std::vector<double> evaluate(const ScoreFunction& g, const Quadrature& quad);

/// |eta|^{-1} at the quadrature nodes with the convention 0^{-1} = 0.
WeightedValues inverse_margin_values(const Problem& problem, const Quadrature& quad);

/// Margin description used by the calibration bounds.
struct MarginProfile {
  double p = 1.0;
  /// ||1/|eta| ||_{p,inf} on the quadrature discretization (may be +inf).
  double weak_norm = 1.0;
  /// eta0 > 0 iff the hard margin condition holds.
  double hard_margin = 0.0;

  bool has_hard_margin() const noexcept { return hard_margin > 0.0; }
};

MarginProfile margin_profile(const Problem& problem, const Quadrature& quad);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// R_S(g2) - R_S(g1) against E[-eta (g2 - g1)] for g1, g2 valued in [-1, 1].
/// Throws InputError if either function leaves [-1, 1] at a node.
IdentityCheck verify_lemma1_identity(const Problem& problem, const ScoreFunction& g1, const ScoreFunction& g2,
                                     const Quadrature& quad);

struct BoundCheck {
  double excess = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// R_S(g) - R_S(g*) >= (1/2) ||1/|eta| ||_{p,inf}^{-1} ||clamp(g) - g*||_{q,inf},
/// q = p / (p + 1). Holds iff excess >= bound - 1e-9.
BoundCheck verify_lemma1_weak_bound(const Problem& problem, const ScoreFunction& g, const Quadrature& quad,
                                    const MarginProfile& profile);
BoundCheck verify_lemma1_weak_bound(const Problem& problem, const ScoreFunction& g, const Quadrature& quad);

/// Hard-margin variant: R_S(g) - R_S(g*) >= ||1/|eta| ||_inf^{-1} ||clamp(g) - g*||_1.
BoundCheck verify_lemma1_hard_bound(const Problem& problem, const ScoreFunction& g, const Quadrature& quad);

/// Minimal-mass (well-behaved set) parameters: rho(U n B(x, eps)) >= c eps^d for eps <= r.
struct WellBehavedParams {
  double c = 1.0;
  double r = 1.0;
  double d = 1.0;

  void validate() const;
};

/// Parameters for which both decision regions of a built-in problem are well
/// behaved (1-D: c = density, d = 1, r = shortest decision interval; sine-2d:
/// d = 2 with a wedge constant checked by verify_well_behaved).
WellBehavedParams well_behaved_params(const Problem& problem);

/// c0 = (c q^q d^d / (d + q)^(d + q))^(1/q); the deviation threshold is c0 G^{-d/q}.
double lemma2_constant(const WellBehavedParams& params, double q);

struct Lemma2Check {
  double weak_norm = 0.0;
  double threshold = 0.0;
  bool holds = false;
};

/// For a G-Lipschitz g with |g(witness) - g*(witness)| >= 1:
/// ||g - g*||_{q,inf} >= c0 G^{-d/q}.
///
/// Throws PreconditionError when G <= 1/r, when the witness does not violate
/// the sign, or when g is not G-Lipschitz between neighbouring quadrature nodes.
Lemma2Check verify_lemma2(const Problem& problem, const ScoreFunction& g, double lipschitz, const Point& witness,
                          const WellBehavedParams& params, double q, const Quadrature& quad);

/// (1/2) ||1/|eta| ||_{p,inf}^{-1} c0 G^{-d (p + 1) / p}; a G-Lipschitz g whose
/// surrogate excess is at most this value classifies perfectly. p = +inf gives
/// the exponent d. Throws PreconditionError when G <= 1/r.
double proposition1_threshold(const MarginProfile& profile, const WellBehavedParams& params, double lipschitz);

/// Lipschitz certificate ||g||_H / sigma of a Gaussian-kernel model, from
/// ||k(x, .) - k(x', .)||_H^2 = 2 - 2 exp(-|x - x'|^2 / 2 sigma^2) <= |x - x'|^2 / sigma^2.
double certified_lipschitz(const TrainedModel& model);

struct TailBound {
  double bound = 1.0;
  /// True when eps / 2 < M phi_sup n^{-1/2}; the bound is then the trivial 1.
  bool vacuous = false;
};

/// exp(-n (eps/2 - M phi_sup n^{-1/2})^2 / 8), the Rademacher + McDiarmid bound
/// on P(R_S(g_n) - R_S(g*) >= eps).
TailBound theorem1_tail(double n, double eps, double m, double phi_sup);

/// Checks rho(U n B(x, eps)) >= c eps^d over all grid pairs, with U the
/// 1-D region given as intervals and `mass(lo, hi)` its measure on [lo, hi].
bool verify_well_behaved_1d(const std::function<double(double, double)>& mass, std::span<const Interval> region,
                            const WellBehavedParams& params, std::span<const double> x_grid,
                            std::span<const double> eps_grid);

/// Decision region {f* = label} of a built-in problem. Grid points outside the
/// region are skipped. 2-D masses are integrated column by column, each column
/// being an exact interval intersection.
bool verify_well_behaved(const Problem& problem, int label, const WellBehavedParams& params,
                         std::span<const Point> x_grid, std::span<const double> eps_grid);

/// Random test functions with a known Lipschitz bound: sums of sinusoids.
class RandomLipschitzFunction {
 public:
  RandomLipschitzFunction(int dimension, Rng& rng, double amplitude = 1.5, int terms = 4, double max_frequency = 6.0);

  double operator()(const Point& x) const;
  double lipschitz() const noexcept { return lipschitz_; }

 private:
  struct Term {
    double coeff;
    Point freq;
    double phase;
  };
  double offset_ = 0.0;
  std::vector<Term> terms_;
  double lipschitz_ = 0.0;
};

/// Clipped random polynomial valued in [-1, 1].
ScoreFunction random_clipped_polynomial(int dimension, Rng& rng, int degree = 5);

}  // namespace svmlab
