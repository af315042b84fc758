#include <svmlab/problems.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace svmlab {

std::string_view to_string(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::power_gap_1d: return "power-gap-1d";
    case ProblemKind::power_full_1d: return "power-full-1d";
    case ProblemKind::sine_2d: return "sine-2d";
    case ProblemKind::gap_step_1d: return "gap-step-1d";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
  for (ProblemKind k : {ProblemKind::power_gap_1d, ProblemKind::power_full_1d, ProblemKind::sine_2d,
                        ProblemKind::gap_step_1d}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown problem '" + std::string(name) +
                   "' (expected power-gap-1d, power-full-1d, sine-2d or gap-step-1d)");
}

StepProfile StepProfile::default_profile() { return StepProfile{{0.5, 1.5}, {0.05, 0.95, -0.95}}; }

Problem::Problem(ProblemKind kind, std::string name, int dimension, std::vector<Interval> support,
                 std::function<double(const Point&)> eta)
    : kind_(kind), name_(std::move(name)), dimension_(dimension), support_(std::move(support)), eta_(std::move(eta)) {
  if (dimension_ != 1 && dimension_ != 2) throw InputError("problem dimension must be 1 or 2");
  if (support_.empty()) throw InputError("problem support is empty");
  if (dimension_ == 2 && support_.size() != 1) throw InputError("2-D support must be a single square");
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!(support_[i].hi > support_[i].lo)) throw InputError("support interval must have positive length");
    if (i > 0 && support_[i].lo < support_[i - 1].hi) throw InputError("support intervals must be sorted and disjoint");
    total_length_ += support_[i].length();
  }
}

double Problem::eta(const Point& x) const {
  if (x.size() != dimension_) throw InputError("eta: point dimension does not match problem " + name_);
  return eta_(x);
}

bool Problem::in_support(const Point& x) const {
  if (x.size() != dimension_) return false;
  if (dimension_ == 2) {
    const Interval& s = support_.front();
    return x(0) >= s.lo && x(0) <= s.hi && x(1) >= s.lo && x(1) <= s.hi;
  }
  return std::any_of(support_.begin(), support_.end(), [&](const Interval& s) { return x(0) >= s.lo && x(0) <= s.hi; });
}

double Problem::density(const Point& x) const {
  if (!in_support(x)) return 0.0;
  return dimension_ == 2 ? 1.0 / (total_length_ * total_length_) : 1.0 / total_length_;
}

void Problem::set_margin(double exponent, double constant, double hard_margin) {
  margin_exponent_ = exponent;
  margin_constant_ = constant;
  hard_margin_ = hard_margin;
}

std::optional<double> Problem::margin_cdf_closed_form(double t) const {
  if (!closed_cdf_) return std::nullopt;
  return closed_cdf_(t);
}

double Problem::cdf(double x) const {
  if (dimension_ != 1) throw InputError("cdf is defined for 1-D problems only");
  double acc = 0.0;
  for (const Interval& s : support_) {
    if (x <= s.lo) break;
    acc += std::min(x, s.hi) - s.lo;
  }
  return acc / total_length_;
}

double Problem::quantile(double u) const {
  if (dimension_ != 1) throw InputError("quantile is defined for 1-D problems only");
  double remaining = std::clamp(u, 0.0, 1.0) * total_length_;
  for (const Interval& s : support_) {
    if (remaining < s.length()) return s.lo + remaining;
    remaining -= s.length();
  }
  return support_.back().hi;
}

double Problem::interval_mass(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  return cdf(hi) - cdf(lo);
}

std::vector<Interval> Problem::decision_intervals(int label) const {
  if (dimension_ != 1) throw InputError("decision_intervals is defined for 1-D problems only");
  // Candidate cut points: discontinuities of eta and zeros of eta, located by
  // scanning each support interval.
  std::vector<Interval> pieces;
  for (const Interval& s : support_) {
    std::vector<double> cuts{s.lo};
    constexpr int kScan = 4096;
    auto f = [&](double x) { return sign_of(eta_(make_point({x}))); };
    double prev_x = s.lo;
    int prev = f(prev_x);
    for (int k = 1; k <= kScan; ++k) {
      const double x = s.lo + s.length() * k / kScan;
      const int cur = f(x);
      if (cur != prev) {
        double a = prev_x;
        double b = x;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (a + b);
          (f(mid) == prev ? a : b) = mid;
        }
        cuts.push_back(b);
      }
      prev_x = x;
      prev = cur;
    }
    cuts.push_back(s.hi);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      if (f(mid) != label) continue;
      if (!pieces.empty() && pieces.back().hi == cuts[k]) {
        pieces.back().hi = cuts[k + 1];
      } else {
        pieces.push_back({cuts[k], cuts[k + 1]});
      }
    }
  }
  return pieces;
}

namespace {

double signed_power(double x, double p) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), p), x);
}

double sine_expression(const Point& x) { return 2.0 * x(1) - 0.5 * std::sin(2.0 * std::numbers::pi * x(0)) - 1.0; }

// P(|2 x2 - s(x1) - 1| < t) for X uniform on the unit square, t <= 1.
double sine_band_mass(double t) {
  constexpr int kNodes = 100000;
  double acc = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double x = (i + 0.5) / kNodes;
    const double centre = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * x);
    acc += std::min(centre + 0.5 * t, 1.0) - std::max(centre - 0.5 * t, 0.0);
  }
  return acc / kNodes;
}

void validate_profile(const StepProfile& s) {
  if (s.levels.size() != s.breaks.size() + 1) throw InputError("step profile needs one more level than breaks");
  if (!std::is_sorted(s.breaks.begin(), s.breaks.end())) throw InputError("step profile breaks must be sorted");
  for (double v : s.levels) {
    if (!(std::abs(v) <= 1.0)) throw InputError("step profile levels must lie in [-1, 1]");
  }
}

double step_value(const StepProfile& s, double x) {
  const auto k = std::upper_bound(s.breaks.begin(), s.breaks.end(), x) - s.breaks.begin();
  return s.levels[static_cast<std::size_t>(k)];
}

}  // namespace

Problem make_problem(ProblemKind kind, const ProblemOptions& options) {
  const double p = options.p;
  if (kind != ProblemKind::sine_2d && kind != ProblemKind::gap_step_1d && !(p > 0.0 && std::isfinite(p))) {
    throw InputError("problem exponent p must be positive");
  }
  const std::string name(to_string(kind));
  switch (kind) {
    case ProblemKind::power_gap_1d: {
      Problem prob(kind, name, 1, {{-1.0, -0.1}, {0.1, 1.0}}, [p](const Point& x) { return signed_power(x(0), p); });
      const double a = 1.0 / p;
      prob.set_margin(a, 1.0 / 0.9, std::pow(0.1, p));
      prob.set_closed_form_cdf([a, eta0 = std::pow(0.1, p)](double t) {
        // Exact zero inside the gap; pow(t, 1/p) may round just above 0.1.
        if (t <= eta0) return 0.0;
        return std::clamp((std::min(std::pow(t, a), 1.0) - 0.1) / 0.9, 0.0, 1.0);
      });
      return prob;
    }
    case ProblemKind::power_full_1d: {
      Problem prob(kind, name, 1, {{-1.0, 1.0}}, [p](const Point& x) { return signed_power(x(0), p); });
      const double a = 1.0 / p;
      prob.set_margin(a, 1.0, 0.0);
      prob.set_closed_form_cdf([a](double t) { return t <= 0.0 ? 0.0 : std::min(std::pow(t, a), 1.0); });
      return prob;
    }
    case ProblemKind::sine_2d: {
      if (options.noiseless) {
        Problem prob(kind, name, 2, {{0.0, 1.0}}, [](const Point& x) {
          const double e = sine_expression(x);
          return e == 0.0 ? 0.0 : std::copysign(1.0, e);
        });
        prob.set_margin(std::numeric_limits<double>::infinity(), 1.0, 1.0);
        prob.set_closed_form_cdf([](double t) { return t > 1.0 ? 1.0 : 0.0; });
        return prob;
      }
      Problem prob(kind, name, 2, {{0.0, 1.0}},
                   [](const Point& x) { return std::clamp(sine_expression(x), -1.0, 1.0); });
      prob.set_margin(1.0, 1.0, 0.0);
      prob.set_closed_form_cdf([](double t) {
        if (t <= 0.0) return 0.0;
        if (t <= 0.5) return t;
        if (t > 1.0) return 1.0;
        return sine_band_mass(t);
      });
      return prob;
    }
    case ProblemKind::gap_step_1d: {
      validate_profile(options.step);
      const StepProfile step = options.step;
      Problem prob(kind, name, 1, {{0.0, 1.0}, {2.0, 3.0}},
                   [step](const Point& x) { return step_value(step, x(0)); });
      std::vector<double> jumps;
      for (std::size_t k = 0; k < step.breaks.size(); ++k) {
        const double b = step.breaks[k];
        const bool interior = std::any_of(prob.support().begin(), prob.support().end(),
                                          [b](const Interval& s) { return b > s.lo && b < s.hi; });
        if (interior && step.levels[k] != step.levels[k + 1]) jumps.push_back(b);
      }
      prob.set_discontinuities(jumps);

      // Mass of each constant piece of eta.
      std::vector<std::pair<double, double>> pieces;  // (|level|, mass)
      std::vector<double> edges{-std::numeric_limits<double>::infinity()};
      edges.insert(edges.end(), step.breaks.begin(), step.breaks.end());
      edges.push_back(std::numeric_limits<double>::infinity());
      double eta0 = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < step.levels.size(); ++k) {
        const double lo = std::max(edges[k], -1.0);
        const double hi = std::min(edges[k + 1], 4.0);
        const double mass = prob.interval_mass(lo, hi);
        if (mass <= 0.0) continue;
        pieces.emplace_back(std::abs(step.levels[k]), mass);
        eta0 = std::min(eta0, std::abs(step.levels[k]));
      }
      prob.set_margin(std::numeric_limits<double>::infinity(), 1.0, eta0);
      prob.set_closed_form_cdf([pieces](double t) {
        double acc = 0.0;
        for (auto [level, mass] : pieces) {
          if (level > 0.0 && level < t) acc += mass;
        }
        return acc;
      });
      return prob;
    }
  }
  throw InputError("unknown problem kind");
}

Problem make_problem(std::string_view name, double p, bool noiseless) {
  ProblemOptions options;
  options.p = p;
  options.noiseless = noiseless;
  return make_problem(parse_problem_kind(name), options);
}

Dataset sample(const Problem& problem, std::size_t n, Rng& rng) {
  if (n == 0) throw InputError("sample: n must be >= 1");
  Dataset data;
  data.points.reserve(n);
  data.labels.reserve(n);
  data.weights.reserve(n);
  const Interval& square = problem.support().front();
  for (std::size_t i = 0; i < n; ++i) {
    Point x = problem.dimension() == 1
                  ? make_point({problem.quantile(rng.uniform())})
                  : make_point({rng.uniform(square.lo, square.hi), rng.uniform(square.lo, square.hi)});
    const int y = rng.uniform() < problem.prob_positive(x) ? 1 : -1;
    data.add(std::move(x), y, 1.0);
  }
  return data;
}

namespace {

std::vector<Point> lattice(const Problem& problem, std::size_t side, bool midpoints) {
  std::vector<Point> pts;
  if (problem.dimension() == 1) {
    pts.reserve(side);
    for (std::size_t k = 0; k < side; ++k) {
      const double u = (static_cast<double>(k) + (midpoints ? 0.5 : 0.0)) / static_cast<double>(side);
      pts.push_back(make_point({problem.quantile(u)}));
    }
    return pts;
  }
  const Interval& s = problem.support().front();
  pts.reserve(side * side);
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      const double x = s.lo + s.length() * (static_cast<double>(i) + 0.5) / static_cast<double>(side);
      const double y = s.lo + s.length() * (static_cast<double>(j) + 0.5) / static_cast<double>(side);
      pts.push_back(make_point({x, y}));
    }
  }
  return pts;
}

}  // namespace

Dataset curated_weighted_dataset(const Problem& problem, std::size_t side) {
  if (side < 2) throw InputError("curated dataset: lattice side must be >= 2");
  Dataset data;
  for (Point& x : lattice(problem, side, true)) {
    const double e = problem.eta(x);
    data.add(x, 1, 0.5 * (1.0 + e));
    data.add(std::move(x), -1, 0.5 * (1.0 - e));
  }
  return data;
}

Quadrature quadrature(const Problem& problem, std::size_t resolution) {
  if (resolution < 1) throw InputError("quadrature: resolution must be >= 1");
  Quadrature q;
  q.nodes = lattice(problem, resolution, problem.dimension() == 2);
  q.masses.assign(q.nodes.size(), 1.0 / static_cast<double>(q.nodes.size()));
  return q;
}

Quadrature default_quadrature(const Problem& problem) {
  return quadrature(problem, problem.dimension() == 1 ? 10000 : 500);
}

Quadrature quadrature_with_nodes(const Problem& problem, std::size_t nodes) {
  if (problem.dimension() == 1) return quadrature(problem, nodes);
  return quadrature(problem, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(nodes)))));
}

double excess_risk(const Problem& problem, const Classifier& f, const Quadrature& quad) {
  double acc = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const double e = problem.eta(quad.nodes[k]);
    if (f(quad.nodes[k]) != sign_of(e)) acc += quad.masses[k] * std::abs(e);
  }
  return acc;
}

double excess_risk(const Problem& problem, const Classifier& f) {
  return excess_risk(problem, f, default_quadrature(problem));
}

double excess_risk_from_scores(const Problem& problem, const Quadrature& quad, std::span<const double> g) {
  if (g.size() != quad.size()) throw InputError("excess_risk: score count does not match quadrature");
  double acc = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const double e = problem.eta(quad.nodes[k]);
    if (sign_of(g[k]) != sign_of(e)) acc += quad.masses[k] * std::abs(e);
  }
  return acc;
}

double disagreement_mass(const Problem& problem, const Quadrature& quad, std::span<const double> g) {
  if (g.size() != quad.size()) throw InputError("disagreement_mass: score count does not match quadrature");
  double acc = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    if (sign_of(g[k]) != problem.bayes(quad.nodes[k])) acc += quad.masses[k];
  }
  return acc;
}

double margin_cdf(const Problem& problem, double t) {
  if (!(t > 0.0)) throw InputError("margin_cdf: t must be positive");
  if (auto closed = problem.margin_cdf_closed_form(t)) return *closed;
  const Quadrature quad = quadrature_with_nodes(problem, 1000000);
  double acc = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const double a = std::abs(problem.eta(quad.nodes[k]));
    if (a > 0.0 && a < t) acc += quad.masses[k];
  }
  return acc;
}

}  // namespace svmlab
