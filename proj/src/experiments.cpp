#include <svmlab/experiments.hpp>
#include <svmlab/random.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

namespace svmlab {

namespace {

// Runs task(i) for i in [0, count) on a small pool. Each index writes only its
// own output slot, so results do not depend on scheduling.
template <class Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void RateTable::validate() const {
  std::set<std::pair<std::int64_t, std::int64_t>> keys;
  for (const RateRow& r : rows) {
    if (r.n <= 0) throw InputError("rate table: n must be positive");
    if (!(r.excess_risk >= 0.0)) throw InputError("rate table: excess risk must be >= 0");
    if (!keys.insert({r.n, r.trial}).second) throw InputError("rate table: duplicate (n, trial)");
  }
}

std::vector<std::int64_t> default_n_grid() { return {16, 32, 64, 128, 256, 512, 1024}; }

RateTable run_rate_experiment(const Problem& problem, const RateConfig& config) {
  if (config.trials < 1) throw InputError("rate experiment: trials must be >= 1");
  if (config.n_grid.empty()) throw InputError("rate experiment: n grid is empty");
  for (std::int64_t n : config.n_grid) {
    if (n < 1) throw InputError("rate experiment: sample sizes must be >= 1");
  }
  const KernelSpec kernel(config.sigma);
  const Quadrature quad = quadrature_with_nodes(problem, config.quadrature_nodes);

  std::vector<std::int64_t> sizes = config.n_grid;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  RateTable table;
  table.rows.resize(sizes.size() * static_cast<std::size_t>(config.trials));
  parallel_for(table.rows.size(), config.threads, [&](std::size_t task) {
    const std::int64_t n = sizes[task / static_cast<std::size_t>(config.trials)];
    const std::int64_t trial = static_cast<std::int64_t>(task % static_cast<std::size_t>(config.trials));
    const auto t = static_cast<std::uint64_t>(trial);
    const auto size = static_cast<std::uint64_t>(n);

    RateRow& row = table.rows[task];
    row.n = n;
    row.trial = trial;
    row.seed = derive_seed(config.seed, {t, size, tag_hash("rates/sample")});
    Rng rng(row.seed);
    const Dataset data = sample(problem, static_cast<std::size_t>(n), rng);

    SolverConfig solver;
    solver.lambda = config.lambda;
    solver.tolerance = config.tolerance;
    solver.max_sweeps = config.max_sweeps;
    solver.seed = derive_seed(config.seed, {t, size, tag_hash("rates/solver")});
    const TrainingResult fit =
        config.surrogate == Surrogate::hinge ? fit_svm(data, kernel, solver) : fit_krr(data, kernel, solver);

    const std::vector<double> g = fit.model.predict(quad.nodes);
    row.excess_risk = excess_risk_from_scores(problem, quad, g);
    row.surrogate_excess = surrogate_excess(problem, quad, g);
    row.zero_error = row.excess_risk == 0.0;
    row.converged = fit.stats.converged;
    row.lipschitz = certified_lipschitz(fit.model);
    row.disagreement = disagreement_mass(problem, quad, g);
  });
  return table;
}

namespace {

std::map<std::int64_t, std::vector<const RateRow*>> group_by_n(const RateTable& table) {
  std::map<std::int64_t, std::vector<const RateRow*>> groups;
  for (const RateRow& r : table.rows) groups[r.n].push_back(&r);
  return groups;
}

double mean_excess(const std::vector<const RateRow*>& rows) {
  double acc = 0.0;
  for (const RateRow* r : rows) acc += r->excess_risk;
  return acc / static_cast<double>(rows.size());
}

}  // namespace

std::vector<RateSummary> summarize(const RateTable& table) {
  std::vector<RateSummary> out;
  for (const auto& [n, rows] : group_by_n(table)) {
    RateSummary s;
    s.n = n;
    s.trials = static_cast<std::int64_t>(rows.size());
    std::vector<double> values;
    double zeros = 0.0;
    for (const RateRow* r : rows) {
      values.push_back(r->excess_risk);
      s.mean_surrogate += r->surrogate_excess;
      if (r->zero_error) zeros += 1.0;
    }
    const double count = static_cast<double>(rows.size());
    s.mean = mean_excess(rows);
    s.mean_surrogate /= count;
    s.zero_fraction = zeros / count;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = rows.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    out.push_back(s);
  }
  return out;
}

RateFit fit_exponential_rate(const RateTable& table, std::int64_t n_min) {
  RateFit fit;
  std::vector<std::pair<double, double>> points;  // (n, log mean)
  for (const auto& [n, rows] : group_by_n(table)) {
    if (n < n_min) continue;
    const double m = mean_excess(rows);
    if (m <= 0.0) {
      fit.perfect_ns.push_back(n);
      continue;
    }
    points.emplace_back(static_cast<double>(n), std::log(m));
  }
  fit.points = points.size();
  if (points.size() < 3) {
    throw InputError("fit_exponential_rate: need at least 3 sample sizes >= n_min with positive mean error");
  }
  double mx = 0.0;
  double my = 0.0;
  for (auto [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (auto [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  const double slope = sxy / sxx;
  fit.c_hat = slope == 0.0 ? 0.0 : -slope;
  double ss_res = 0.0;
  for (auto [x, y] : points) {
    const double r = y - (my + slope * (x - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

Proposition1Audit audit_proposition1(const Problem& problem, const RateTable& table) {
  const Quadrature quad = default_quadrature(problem);
  const MarginProfile profile = margin_profile(problem, quad);
  const WellBehavedParams params = well_behaved_params(problem);
  const double min_lipschitz = std::nextafter(1.0 / params.r, std::numeric_limits<double>::infinity());

  Proposition1Audit audit;
  audit.min_ratio = std::numeric_limits<double>::infinity();
  for (const RateRow& r : table.rows) {
    if (!(r.disagreement > 0.0)) continue;
    const double threshold = proposition1_threshold(profile, params, std::max(r.lipschitz, min_lipschitz));
    ++audit.audited;
    audit.min_ratio = std::min(audit.min_ratio, r.surrogate_excess / threshold);
    if (r.surrogate_excess < threshold) ++audit.violations;
  }
  if (audit.audited == 0) audit.min_ratio = 0.0;
  return audit;
}

LevelGrid level_grid(const Problem& problem, const std::function<double(const Point&)>& g, std::size_t test_side) {
  if (problem.dimension() != 2) throw InputError("level grid: problem must be 2-D");
  if (test_side < 2) throw InputError("level grid: test side must be >= 2");
  const Quadrature quad = quadrature(problem, test_side);
  LevelGrid grid;
  const Interval& s = problem.support().front();
  for (std::size_t i = 0; i < test_side; ++i) {
    const double c = s.lo + s.length() * (static_cast<double>(i) + 0.5) / static_cast<double>(test_side);
    grid.xs.push_back(c);
    grid.ys.push_back(c);
  }
  grid.g = evaluate(g, quad);
  grid.lines = zero_level_lines(grid.xs, grid.ys, grid.g);
  grid.symmetric_difference = disagreement_mass(problem, quad, grid.g);
  grid.excess_risk = excess_risk_from_scores(problem, quad, grid.g);
  return grid;
}

LevelGrid run_levelset_experiment(const Problem& problem, const LevelsetConfig& config) {
  if (config.train_side < 2 || config.test_side < 2) throw InputError("levelset experiment: sides must be >= 2");
  const Dataset data = curated_weighted_dataset(problem, config.train_side);
  SolverConfig solver;
  solver.lambda = config.lambda;
  solver.tolerance = config.tolerance;
  solver.max_sweeps = config.max_sweeps;
  solver.seed = derive_seed(config.seed, {tag_hash("levelsets/solver")});
  const TrainingResult fit = fit_svm(data, KernelSpec(config.sigma), solver);
  LevelGrid grid = level_grid(problem, [&](const Point& x) { return fit.model.predict(x); }, config.test_side);
  grid.stats = fit.stats;
  return grid;
}

namespace {

std::size_t support_piece(const Problem& problem, double x) {
  const auto support = problem.support();
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (x >= support[k].lo && x <= support[k].hi) return k;
  }
  return support.size();
}

}  // namespace

SurrogateReport surrogate_report(const Problem& problem, const Quadrature& quad, std::vector<double> g,
                                 Surrogate surrogate) {
  if (problem.dimension() != 1) throw InputError("surrogate report: problem must be 1-D");
  if (g.size() != quad.size()) throw InputError("surrogate report: score count does not match quadrature");
  SurrogateReport rep;
  rep.surrogate = surrogate;
  double max_abs = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const double x = quad.nodes[k](0);
    max_abs = std::max(max_abs, std::abs(g[k]));
    if (sign_of(g[k]) == problem.bayes(quad.nodes[k])) {
      rep.sign_agreement += quad.masses[k];
    } else {
      double nearest = std::numeric_limits<double>::infinity();
      for (double jump : problem.discontinuities()) nearest = std::min(nearest, std::abs(x - jump));
      rep.max_disagreement_distance = std::max(rep.max_disagreement_distance, nearest);
    }
    if (k + 1 < quad.size() && support_piece(problem, x) == support_piece(problem, quad.nodes[k + 1](0)) &&
        sign_of(g[k]) != sign_of(g[k + 1]) && problem.bayes(quad.nodes[k]) == problem.bayes(quad.nodes[k + 1])) {
      ++rep.spurious_sign_changes;
    }
  }
  rep.overshoot = max_abs - 1.0;
  rep.g = std::move(g);
  return rep;
}

ComparisonReport run_surrogate_comparison(const Problem& problem, const ComparisonConfig& config) {
  const Dataset data = curated_weighted_dataset(problem, config.train_side);
  const KernelSpec kernel(config.sigma);
  SolverConfig solver;
  solver.lambda = config.lambda;
  solver.tolerance = config.tolerance;
  solver.max_sweeps = config.max_sweeps;
  solver.seed = derive_seed(config.seed, {tag_hash("compare/solver")});

  ComparisonReport report;
  report.quadrature = quadrature(problem, config.quadrature_nodes);
  for (const Point& x : report.quadrature.nodes) report.eta.push_back(problem.eta(x));

  const TrainingResult hinge = fit_svm(data, kernel, solver);
  report.hinge = surrogate_report(problem, report.quadrature, hinge.model.predict(report.quadrature.nodes),
                                  Surrogate::hinge);
  report.hinge.stats = hinge.stats;

  const TrainingResult ls = fit_krr(data, kernel, solver);
  report.least_squares = surrogate_report(problem, report.quadrature, ls.model.predict(report.quadrature.nodes),
                                          Surrogate::least_squares);
  report.least_squares.stats = ls.stats;
  return report;
}

}  // namespace svmlab

namespace svmlab {

namespace {

Quadrature verify_quadrature(const Problem& problem, const VerifyConfig& config) {
  return problem.dimension() == 1 ? quadrature(problem, config.quadrature_nodes_1d)
                                  : quadrature(problem, config.quadrature_side_2d);
}

// Grid of support points for the well-behaved checks.
std::vector<Point> support_grid(const Problem& problem) {
  std::vector<Point> pts;
  if (problem.dimension() == 1) {
    for (const Interval& s : problem.support()) {
      for (int k = 0; k <= 100; ++k) pts.push_back(make_point({s.lo + s.length() * k / 100.0}));
    }
    return pts;
  }
  const Interval& s = problem.support().front();
  for (int j = 0; j <= 20; ++j) {
    for (int i = 0; i <= 20; ++i) pts.push_back(make_point({s.lo + s.length() * i / 20.0, s.lo + s.length() * j / 20.0}));
  }
  return pts;
}

void problem_checks(const Problem& problem, const VerifyConfig& config, std::vector<CheckRecord>& out) {
  const Quadrature quad = verify_quadrature(problem, config);
  const MarginProfile profile = margin_profile(problem, quad);
  const WellBehavedParams params = well_behaved_params(problem);
  const double q = std::isinf(profile.p) ? 1.0 : profile.p / (profile.p + 1.0);
  const double min_lipschitz = std::nextafter(1.0 / params.r, std::numeric_limits<double>::infinity());
  const std::string& name = problem.name();
  const int dim = problem.dimension();

  for (std::int64_t t = 0; t < config.trials; ++t) {
    const auto trial = static_cast<std::uint64_t>(t);
    Rng rng(derive_seed(config.seed, {trial, tag_hash("verify/identity"), tag_hash(name)}));
    const ScoreFunction g1 = random_clipped_polynomial(dim, rng);
    const ScoreFunction g2 = random_clipped_polynomial(dim, rng);
    const IdentityCheck id = verify_lemma1_identity(problem, g1, g2, quad);
    out.push_back({"risk_identity", name, t, id.residual, config.identity_tolerance,
                   id.residual <= config.identity_tolerance});
  }

  for (std::int64_t t = 0; t < config.trials; ++t) {
    const auto trial = static_cast<std::uint64_t>(t);
    Rng rng(derive_seed(config.seed, {trial, tag_hash("verify/lipschitz"), tag_hash(name)}));
    const RandomLipschitzFunction f(dim, rng);
    const ScoreFunction g = [&f](const Point& x) { return f(x); };

    const BoundCheck weak = verify_lemma1_weak_bound(problem, g, quad, profile);
    out.push_back({"weak_calibration", name, t, weak.excess, weak.bound, weak.holds});
    if (problem.hard_margin() > 0.0) {
      const BoundCheck hard = verify_lemma1_hard_bound(problem, g, quad);
      out.push_back({"hard_calibration", name, t, hard.excess, hard.bound, hard.holds});
    }

    // The Lipschitz checks need a support point where g is off by at least 1.
    const std::vector<double> values = evaluate(g, quad);
    std::size_t witness = quad.size();
    for (std::size_t k = 0; k < quad.size(); ++k) {
      if (std::abs(values[k] - problem.bayes(quad.nodes[k])) >= 1.0) {
        witness = k;
        break;
      }
    }
    if (witness == quad.size()) continue;
    const double lipschitz = std::max(f.lipschitz(), min_lipschitz);
    const Lemma2Check l2 = verify_lemma2(problem, g, lipschitz, quad.nodes[witness], params, q, quad);
    out.push_back({"lipschitz_deviation", name, t, l2.weak_norm, l2.threshold, l2.holds});
    const double excess = surrogate_excess(problem, quad, values);
    const double threshold = proposition1_threshold(profile, params, lipschitz);
    out.push_back({"perfect_classification_threshold", name, t, excess, threshold, excess >= threshold - 1e-12});
  }

  const std::vector<Point> grid = support_grid(problem);
  std::vector<double> eps_grid;
  for (int k = 1; k <= 10; ++k) eps_grid.push_back(params.r * k / 10.0);
  for (int label : {1, -1}) {
    const bool ok = verify_well_behaved(problem, label, params, grid, eps_grid);
    out.push_back({label > 0 ? "well_behaved_positive" : "well_behaved_negative", name, 0, params.c, params.r, ok});
  }
}

}  // namespace

std::vector<CheckRecord> run_verification_suite(const std::vector<Problem>& problems, const VerifyConfig& config) {
  if (config.trials < 0) throw InputError("verification: trials must be >= 0");
  std::vector<CheckRecord> out;

  const double c0 = lemma2_constant({1.0, 1.0, 1.0}, 1.0);
  out.push_back({"deviation_constant", "", 0, c0, 0.25, c0 == 0.25});

  const double tail = theorem1_tail(1e4, 0.1, 1.0, 1.0).bound;
  out.push_back({"tail_value", "", 0, tail, std::exp(-2.0), std::abs(tail - std::exp(-2.0)) <= 1e-12});

  Rng rng(derive_seed(config.seed, {tag_hash("verify/tail")}));
  for (std::int64_t s = 0; s < 20; ++s) {
    const double eps = rng.uniform(0.01, 1.0);
    const double m = rng.uniform(0.1, 3.0);
    const double phi = rng.uniform(0.1, 3.0);
    // Bound decreases once sqrt(n) eps / 2 >= M phi.
    const double n0 = std::ceil(std::pow(2.0 * m * phi / eps, 2.0));
    double worst_increase = -std::numeric_limits<double>::infinity();
    double prev = theorem1_tail(n0, eps, m, phi).bound;
    for (int k = 1; k <= 60; ++k) {
      const double n = n0 * std::pow(1.25, k);
      const double cur = theorem1_tail(n, eps, m, phi).bound;
      worst_increase = std::max(worst_increase, cur - prev);
      prev = cur;
    }
    out.push_back({"tail_monotone", "", s, worst_increase, 0.0, worst_increase <= 0.0});
  }

  for (const Problem& problem : problems) problem_checks(problem, config, out);
  return out;
}

}  // namespace svmlab
