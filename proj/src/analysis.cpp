#include <svmlab/analysis.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace svmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dual_exponent(double p) { return std::isinf(p) ? 1.0 : p / (p + 1.0); }

}  // namespace

void WeightedValues::validate() const {
  if (values.size() != masses.size()) throw InputError("weighted values: length mismatch");
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0)) throw InputError("weighted values: masses must be >= 0");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("weighted values: masses must sum to 1");
}

double lorentz_norm(const WeightedValues& f, double p) {
  if (!(p > 0.0)) throw InputError("lorentz_norm: p must be positive");
  if (f.values.size() != f.masses.size()) throw InputError("lorentz_norm: length mismatch");
  std::vector<std::size_t> order(f.values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(f.values[a]) > std::abs(f.values[b]); });
  double best = 0.0;
  double tail = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double t = std::abs(f.values[order[k]]);
    tail += f.masses[order[k]];
    // Evaluate only once every atom at level t is in the tail.
    if (k + 1 < order.size() && std::abs(f.values[order[k + 1]]) == t) continue;
    if (t <= 0.0 || tail <= 0.0) continue;
    const double candidate = std::isinf(p) ? t : t * std::pow(tail, 1.0 / p);
    best = std::max(best, candidate);
  }
  return best;
}

double lp_norm(const WeightedValues& f, double p) {
  if (!(p > 0.0)) throw InputError("lp_norm: p must be positive");
  if (f.values.size() != f.masses.size()) throw InputError("lp_norm: length mismatch");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      if (f.masses[i] > 0.0) m = std::max(m, std::abs(f.values[i]));
    }
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) acc += f.masses[i] * std::pow(std::abs(f.values[i]), p);
  return std::pow(acc, 1.0 / p);
}

double pointwise_hinge_risk(double prob_pos, double q) {
  return prob_pos * std::max(0.0, 1.0 - q) + (1.0 - prob_pos) * std::max(0.0, 1.0 + q);
}

double clamp_pm1(double t) { return std::clamp(t, -1.0, 1.0); }

std::vector<double> evaluate(const ScoreFunction& g, const Quadrature& quad) {
  std::vector<double> out(quad.size());
  for (std::size_t k = 0; k < quad.size(); ++k) out[k] = g(quad.nodes[k]);
  return out;
}

double surrogate_risk(const Problem& problem, const Quadrature& quad, std::span<const double> g) {
  if (g.size() != quad.size()) throw InputError("surrogate_risk: score count does not match quadrature");
  double acc = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    acc += quad.masses[k] * pointwise_hinge_risk(problem.prob_positive(quad.nodes[k]), g[k]);
  }
  return acc;
}

double surrogate_excess(const Problem& problem, const Quadrature& quad, std::span<const double> g) {
  if (g.size() != quad.size()) throw InputError("surrogate_excess: score count does not match quadrature");
  double acc = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const double e = problem.eta(quad.nodes[k]);
    const double prob = 0.5 * (1.0 + e);
    acc += quad.masses[k] * (pointwise_hinge_risk(prob, g[k]) - pointwise_hinge_risk(prob, sign_of(e)));
  }
  return acc;
}

double surrogate_excess(const Problem& problem, const ScoreFunction& g, const Quadrature& quad) {
  const std::vector<double> values = evaluate(g, quad);
  return surrogate_excess(problem, quad, values);
}

double surrogate_excess(const Problem& problem, const ScoreFunction& g) {
  return surrogate_excess(problem, g, default_quadrature(problem));
}

WeightedValues inverse_margin_values(const Problem& problem, const Quadrature& quad) {
  WeightedValues w;
  w.values.reserve(quad.size());
  for (const Point& x : quad.nodes) {
    const double e = std::abs(problem.eta(x));
    w.values.push_back(e == 0.0 ? 0.0 : 1.0 / e);
  }
  w.masses = quad.masses;
  return w;
}

MarginProfile margin_profile(const Problem& problem, const Quadrature& quad) {
  MarginProfile profile;
  profile.p = problem.margin_exponent();
  profile.weak_norm = lorentz_norm(inverse_margin_values(problem, quad), profile.p);
  profile.hard_margin = problem.hard_margin();
  return profile;
}

namespace {

void require_unit_range(const std::vector<double>& v, const char* which) {
  for (double x : v) {
    if (!(std::abs(x) <= 1.0 + 1e-12)) {
      throw InputError(std::string("verify_lemma1_identity: ") + which + " leaves [-1, 1] (value " +
                       std::to_string(x) + ")");
    }
  }
}

// clamp(g) - g* at every node.
WeightedValues projected_deviation(const Problem& problem, const Quadrature& quad, std::span<const double> g) {
  WeightedValues u;
  u.values.reserve(quad.size());
  for (std::size_t k = 0; k < quad.size(); ++k) u.values.push_back(clamp_pm1(g[k]) - problem.bayes(quad.nodes[k]));
  u.masses = quad.masses;
  return u;
}

}  // namespace

IdentityCheck verify_lemma1_identity(const Problem& problem, const ScoreFunction& g1, const ScoreFunction& g2,
                                     const Quadrature& quad) {
  const std::vector<double> v1 = evaluate(g1, quad);
  const std::vector<double> v2 = evaluate(g2, quad);
  require_unit_range(v1, "g1");
  require_unit_range(v2, "g2");
  IdentityCheck out;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const double e = problem.eta(quad.nodes[k]);
    const double prob = 0.5 * (1.0 + e);
    out.lhs += quad.masses[k] * (pointwise_hinge_risk(prob, v2[k]) - pointwise_hinge_risk(prob, v1[k]));
    out.rhs += quad.masses[k] * (-e * (v2[k] - v1[k]));
  }
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

BoundCheck verify_lemma1_weak_bound(const Problem& problem, const ScoreFunction& g, const Quadrature& quad,
                                    const MarginProfile& profile) {
  const std::vector<double> values = evaluate(g, quad);
  BoundCheck out;
  out.excess = surrogate_excess(problem, quad, values);
  const double q = dual_exponent(profile.p);
  const double deviation = lorentz_norm(projected_deviation(problem, quad, values), q);
  out.bound = profile.weak_norm > 0.0 ? 0.5 * deviation / profile.weak_norm : 0.0;
  out.holds = out.excess >= out.bound - 1e-9;
  return out;
}

BoundCheck verify_lemma1_weak_bound(const Problem& problem, const ScoreFunction& g, const Quadrature& quad) {
  return verify_lemma1_weak_bound(problem, g, quad, margin_profile(problem, quad));
}

BoundCheck verify_lemma1_hard_bound(const Problem& problem, const ScoreFunction& g, const Quadrature& quad) {
  if (!(problem.hard_margin() > 0.0)) {
    throw PreconditionError("verify_lemma1_hard_bound: " + problem.name() + " has no hard margin");
  }
  const std::vector<double> values = evaluate(g, quad);
  BoundCheck out;
  out.excess = surrogate_excess(problem, quad, values);
  const double inv_sup = lp_norm(inverse_margin_values(problem, quad), kInf);
  out.bound = lp_norm(projected_deviation(problem, quad, values), 1.0) / inv_sup;
  out.holds = out.excess >= out.bound - 1e-9;
  return out;
}

void WellBehavedParams::validate() const {
  if (!(c > 0.0) || !(r > 0.0) || !(d > 0.0)) throw InputError("well-behaved parameters must be positive");
}

WellBehavedParams well_behaved_params(const Problem& problem) {
  if (problem.dimension() == 2) {
    // The narrowest corner of either region is the wedge between a vertical
    // side and the sine frontier, of angle atan(2 / pi) ~ 0.567 (area ~ 0.28 eps^2).
    return {0.2, 0.25, 2.0};
  }
  const double density = problem.density(make_point({problem.quantile(0.5)}));
  double shortest = kInf;
  for (int label : {-1, 1}) {
    for (const Interval& s : problem.decision_intervals(label)) shortest = std::min(shortest, s.length());
  }
  return {density, shortest, 1.0};
}

double lemma2_constant(const WellBehavedParams& params, double q) {
  params.validate();
  if (!(q > 0.0 && q <= 1.0)) throw InputError("lemma2_constant: q must lie in (0, 1]");
  const double d = params.d;
  const double log_peak = q * std::log(q) + d * std::log(d) - (d + q) * std::log(d + q);
  return std::pow(params.c * std::exp(log_peak), 1.0 / q);
}

namespace {

// G-Lipschitz check between neighbouring quadrature nodes (sorted 1-D nodes, or
// lattice neighbours in 2-D).
bool lipschitz_on_nodes(const Problem& problem, const Quadrature& quad, std::span<const double> g, double lipschitz) {
  auto ok = [&](std::size_t a, std::size_t b) {
    const double dist = (quad.nodes[a] - quad.nodes[b]).norm();
    return std::abs(g[a] - g[b]) <= lipschitz * dist * (1.0 + 1e-9) + 1e-12;
  };
  if (problem.dimension() == 1) {
    for (std::size_t k = 0; k + 1 < quad.size(); ++k) {
      // Nodes on different support pieces are not neighbours.
      const double gap = quad.nodes[k + 1](0) - quad.nodes[k](0);
      if (problem.interval_mass(quad.nodes[k](0), quad.nodes[k + 1](0)) <
          0.999 * gap * problem.density(quad.nodes[k])) {
        continue;
      }
      if (!ok(k, k + 1)) return false;
    }
    return true;
  }
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(quad.size()))));
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      const std::size_t k = j * side + i;
      if (i + 1 < side && !ok(k, k + 1)) return false;
      if (j + 1 < side && !ok(k, k + side)) return false;
    }
  }
  return true;
}

}  // namespace

Lemma2Check verify_lemma2(const Problem& problem, const ScoreFunction& g, double lipschitz, const Point& witness,
                          const WellBehavedParams& params, double q, const Quadrature& quad) {
  params.validate();
  if (!(lipschitz > 1.0 / params.r)) {
    throw PreconditionError("verify_lemma2: Lipschitz constant must exceed 1/r = " + std::to_string(1.0 / params.r));
  }
  if (!problem.in_support(witness) || std::abs(g(witness) - problem.bayes(witness)) < 1.0) {
    throw PreconditionError("verify_lemma2: witness must be a support point with |g - g*| >= 1");
  }
  const std::vector<double> values = evaluate(g, quad);
  if (!lipschitz_on_nodes(problem, quad, values, lipschitz)) {
    throw PreconditionError("verify_lemma2: g is not " + std::to_string(lipschitz) + "-Lipschitz on the quadrature");
  }
  WeightedValues deviation;
  deviation.masses = quad.masses;
  deviation.values.reserve(quad.size());
  for (std::size_t k = 0; k < quad.size(); ++k) deviation.values.push_back(values[k] - problem.bayes(quad.nodes[k]));

  Lemma2Check out;
  out.weak_norm = lorentz_norm(deviation, q);
  out.threshold = lemma2_constant(params, q) * std::pow(lipschitz, -params.d / q);
  out.holds = out.weak_norm >= out.threshold - 1e-9;
  return out;
}

double proposition1_threshold(const MarginProfile& profile, const WellBehavedParams& params, double lipschitz) {
  params.validate();
  if (!(lipschitz > 1.0 / params.r)) {
    throw PreconditionError("proposition1_threshold: Lipschitz constant must exceed 1/r");
  }
  if (!(profile.weak_norm > 0.0)) throw InputError("proposition1_threshold: weak norm must be positive");
  const double q = dual_exponent(profile.p);
  return 0.5 / profile.weak_norm * lemma2_constant(params, q) * std::pow(lipschitz, -params.d / q);
}

double certified_lipschitz(const TrainedModel& model) {
  return std::sqrt(model.rkhs_norm_squared()) / model.kernel().sigma();
}

TailBound theorem1_tail(double n, double eps, double m, double phi_sup) {
  if (!(n >= 1.0) || !(eps > 0.0) || !(m > 0.0) || !(phi_sup > 0.0)) {
    throw InputError("theorem1_tail: arguments must be positive (n >= 1)");
  }
  const double slack = 0.5 * eps - m * phi_sup / std::sqrt(n);
  if (slack < 0.0) return {1.0, true};
  return {std::exp(-n * slack * slack / 8.0), false};
}

bool verify_well_behaved_1d(const std::function<double(double, double)>& mass, std::span<const Interval> region,
                            const WellBehavedParams& params, std::span<const double> x_grid,
                            std::span<const double> eps_grid) {
  params.validate();
  for (double eps : eps_grid) {
    if (eps < 0.0 || eps > params.r) throw InputError("verify_well_behaved: eps grid must lie in [0, r]");
  }
  for (double x : x_grid) {
    const bool inside = std::any_of(region.begin(), region.end(),
                                    [x](const Interval& s) { return x >= s.lo && x <= s.hi; });
    if (!inside) continue;
    for (double eps : eps_grid) {
      double m = 0.0;
      for (const Interval& s : region) {
        const double lo = std::max(s.lo, x - eps);
        const double hi = std::min(s.hi, x + eps);
        if (hi > lo) m += mass(lo, hi);
      }
      const double need = params.c * std::pow(eps, params.d);
      if (m < need * (1.0 - 1e-12) - 1e-15) return false;
    }
  }
  return true;
}

namespace {

// y-range of {f* = label} in the column x1 of the sine-2d square.
Interval sine_column(double x1, int label) {
  const double frontier = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * x1);
  return label > 0 ? Interval{frontier, 1.0} : Interval{0.0, frontier};
}

double sine_region_ball_mass(const Point& x, double eps, int label) {
  constexpr int kColumns = 4000;
  const double lo = std::max(0.0, x(0) - eps);
  const double hi = std::min(1.0, x(0) + eps);
  if (hi <= lo) return 0.0;
  const double h = (hi - lo) / kColumns;
  double acc = 0.0;
  for (int i = 0; i < kColumns; ++i) {
    const double c = lo + (i + 0.5) * h;
    const double dx = c - x(0);
    const double half = std::sqrt(std::max(0.0, eps * eps - dx * dx));
    const Interval col = sine_column(c, label);
    const double a = std::max(col.lo, x(1) - half);
    const double b = std::min(col.hi, x(1) + half);
    if (b > a) acc += (b - a) * h;
  }
  return acc;
}

}  // namespace

bool verify_well_behaved(const Problem& problem, int label, const WellBehavedParams& params,
                         std::span<const Point> x_grid, std::span<const double> eps_grid) {
  if (problem.dimension() == 1) {
    const std::vector<Interval> region = problem.decision_intervals(label);
    std::vector<double> xs;
    xs.reserve(x_grid.size());
    for (const Point& p : x_grid) xs.push_back(p(0));
    return verify_well_behaved_1d([&](double lo, double hi) { return problem.interval_mass(lo, hi); }, region,
                                  params, xs, eps_grid);
  }
  if (problem.kind() != ProblemKind::sine_2d) throw InputError("verify_well_behaved: unsupported 2-D problem");
  params.validate();
  for (double eps : eps_grid) {
    if (eps < 0.0 || eps > params.r) throw InputError("verify_well_behaved: eps grid must lie in [0, r]");
  }
  // Column integration has O(h^1.5) error at the chord ends; allow 1e-3 relative.
  for (const Point& x : x_grid) {
    if (!problem.in_support(x) || problem.bayes(x) != label) continue;
    for (double eps : eps_grid) {
      const double need = params.c * std::pow(eps, params.d);
      if (sine_region_ball_mass(x, eps, label) < need * (1.0 - 1e-3)) return false;
    }
  }
  return true;
}

RandomLipschitzFunction::RandomLipschitzFunction(int dimension, Rng& rng, double amplitude, int terms,
                                                 double max_frequency) {
  if (dimension < 1 || dimension > kMaxDim) throw InputError("random function: bad dimension");
  offset_ = rng.uniform(-0.5, 0.5);
  double norm = 0.0;
  for (int j = 0; j < terms; ++j) {
    Term t{rng.uniform(-1.0, 1.0), Point(dimension), rng.uniform(0.0, 2.0 * std::numbers::pi)};
    for (int i = 0; i < dimension; ++i) t.freq(i) = rng.uniform(-max_frequency, max_frequency);
    norm += std::abs(t.coeff);
    terms_.push_back(std::move(t));
  }
  for (Term& t : terms_) {
    t.coeff *= amplitude / norm;
    lipschitz_ += std::abs(t.coeff) * t.freq.norm();
  }
}

double RandomLipschitzFunction::operator()(const Point& x) const {
  double v = offset_;
  for (const Term& t : terms_) v += t.coeff * std::sin(t.freq.dot(x) + t.phase);
  return v;
}

ScoreFunction random_clipped_polynomial(int dimension, Rng& rng, int degree) {
  if (dimension < 1 || dimension > 2) throw InputError("random polynomial: dimension must be 1 or 2");
  std::vector<std::pair<std::array<int, 2>, double>> terms;
  for (int i = 0; i <= degree; ++i) {
    for (int j = 0; j <= (dimension == 2 ? degree - i : 0); ++j) terms.push_back({{i, j}, 2.0 * rng.normal()});
  }
  return [terms, dimension](const Point& x) {
    double v = 0.0;
    for (const auto& [powers, coeff] : terms) {
      double m = coeff * std::pow(x(0), powers[0]);
      if (dimension == 2) m *= std::pow(x(1), powers[1]);
      v += m;
    }
    return clamp_pm1(v);
  };
}

}  // namespace svmlab
