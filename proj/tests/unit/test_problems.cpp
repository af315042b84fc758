#include <doctest.h>

#include <svmlab/problems.hpp>
#include <svmlab/random.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

using namespace svmlab;

namespace {

const char* const kNames[] = {"power-gap-1d", "power-full-1d", "sine-2d", "gap-step-1d"};

// Monte Carlo excess risk drawn directly from the marginal description.
double monte_carlo_excess(const Problem& problem, const Classifier& f, std::size_t n, Rng& rng) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Point x = problem.dimension() == 2 ? make_point({rng.uniform(), rng.uniform()})
                                       : make_point({problem.quantile(rng.uniform())});
    const double e = problem.eta(x);
    if (f(x) != sign_of(e)) acc += std::abs(e);
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("make_problem examples") {
  const Problem gap = make_problem("power-gap-1d", 1.0, false);
  CHECK(gap.eta(make_point({0.5})) == 0.5);
  CHECK(gap.eta(make_point({-0.5})) == -0.5);
  CHECK(gap.bayes(make_point({0.5})) == 1);
  CHECK(gap.prob_positive(make_point({0.5})) == 0.75);

  const Problem sine = make_problem("sine-2d", 1.0, false);
  CHECK(sine.eta(make_point({0.0, 0.75})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sine.eta(make_point({0.0, 1.0})) == 1.0);

  const Problem quiet = make_problem("sine-2d", 1.0, true);
  CHECK(quiet.eta(make_point({0.25, 0.76})) == 1.0);
  CHECK(quiet.eta(make_point({0.25, 0.74})) == -1.0);

  CHECK_THROWS_AS(make_problem("power-gap-2d", 1.0, false), InputError);
  CHECK_THROWS_AS(make_problem("power-gap-1d", -1.0, false), InputError);
}

TEST_CASE("densities integrate to one") {
  for (const char* name : kNames) {
    const Problem prob = make_problem(name, 2.0, false);
    CAPTURE(std::string(name));
    double acc = 0.0;
    if (prob.dimension() == 1) {
      const int m = 400000;
      const double lo = -1.5, hi = 3.5;
      for (int k = 0; k < m; ++k) acc += prob.density(make_point({lo + (k + 0.5) * (hi - lo) / m})) * (hi - lo) / m;
      CHECK(std::abs(acc - 1.0) <= 1e-4);
      // Piecewise-constant density: exact integral from the support description.
      double exact = 0.0;
      for (const Interval& s : prob.support()) exact += prob.density(make_point({0.5 * (s.lo + s.hi)})) * s.length();
      CHECK(std::abs(exact - 1.0) <= 1e-8);
    } else {
      const int m = 200;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) acc += prob.density(make_point({(i + 0.5) / m, (j + 0.5) / m})) / (m * m);
      CHECK(std::abs(acc - 1.0) <= 1e-8);
    }
    const Quadrature q = default_quadrature(prob);
    double mass = 0.0;
    for (double m : q.masses) mass += m;
    CHECK(std::abs(mass - 1.0) <= 1e-8);
  }
}

TEST_CASE("sampling") {
  Rng rng(42);
  const Problem gap = make_problem("power-gap-1d", 1.0, false);
  const Dataset d = sample(gap, 20000, rng);
  REQUIRE(d.size() == 20000);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK_FALSE((d.points[i](0) > -0.1 && d.points[i](0) < 0.1));
    CHECK(d.weights[i] == 1.0);
  }

  ProblemOptions certain;
  certain.step = StepProfile{{}, {1.0}};
  const Problem sure = make_problem(ProblemKind::gap_step_1d, certain);
  const Dataset s = sample(sure, 1000, rng);
  for (int y : s.labels) CHECK(y == 1);

  // Label mean in a narrow bin against eta at its centre.
  const Problem full = make_problem("power-full-1d", 1.0, false);
  const Dataset big = sample(full, 1000000, rng);
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < big.size(); ++i) {
    if (std::abs(big.points[i](0) - 0.6) < 0.005) {
      sum += big.labels[i];
      ++count;
    }
  }
  REQUIRE(count > 2000);
  const double mean = sum / count;
  const double se = std::sqrt((1 - 0.36) / count);
  CHECK(std::abs(mean - 0.6) <= 3 * se);

  Rng a(1), b(1);
  const Dataset da = sample(full, 50, a);
  const Dataset db = sample(full, 50, b);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(da.points[i](0) == db.points[i](0));
    CHECK(da.labels[i] == db.labels[i]);
  }
}

TEST_CASE("curated weighted dataset") {
  const Problem sine = make_problem("sine-2d", 1.0, false);
  const Dataset d = curated_weighted_dataset(sine, 100);
  REQUIRE(d.size() == 20000);
  for (std::size_t i = 0; i + 1 < d.size(); i += 2) {
    CHECK(d.points[i] == d.points[i + 1]);
    CHECK(d.labels[i] == -d.labels[i + 1]);
    CHECK(d.weights[i] + d.weights[i + 1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.weights[i] >= 0.0);
    CHECK(d.weights[i] <= 1.0);
    const double e = sine.eta(d.points[i]);
    const double wpos = d.labels[i] == 1 ? d.weights[i] : d.weights[i + 1];
    CHECK(wpos == doctest::Approx((1 + e) / 2).epsilon(1e-15));
  }

  // eta = 0 gives (0.5, 0.5); eta = 1 gives (1, 0).
  ProblemOptions o;
  o.step = StepProfile{{1.5}, {0.0, 1.0}};
  const Problem flat = make_problem(ProblemKind::gap_step_1d, o);
  const Dataset f = curated_weighted_dataset(flat, 10);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const bool left = f.points[i](0) < 1.5;
    if (left) CHECK(f.weights[i] == 0.5);
    if (!left) CHECK(f.weights[i] == (f.labels[i] == 1 ? 1.0 : 0.0));
  }
}

TEST_CASE("excess_risk examples") {
  const Problem gap = make_problem("power-gap-1d", 1.0, false);
  const Quadrature q = default_quadrature(gap);
  CHECK(excess_risk(gap, [&](const Point& x) { return gap.bayes(x); }, q) == 0.0);

  const Classifier plus = [](const Point&) { return 1; };
  // Closed form: integral of |x| over [-1, -0.1], divided by 1.8.
  const double closed = 0.495 / 1.8;
  CHECK(std::abs(excess_risk(gap, plus) - closed) <= 2e-4);
  Rng rng(99);
  CHECK(std::abs(monte_carlo_excess(gap, plus, 1000000, rng) - closed) <= 3e-3);

  const Classifier flip = [&](const Point& x) { return -gap.bayes(x); };
  CHECK(std::abs(excess_risk(gap, flip) - 0.55) <= 2e-4);
}

TEST_CASE("Monte Carlo and quadrature excess risks agree") {
  Rng rng(2718);
  for (int t = 0; t < 10; ++t) {
    const Problem prob = make_problem(kNames[t % 4], 1.0, false);
    const double a = rng.uniform(-1, 3);
    const double b = rng.uniform(0, 1);
    const int s = rng.uniform() < 0.5 ? -1 : 1;
    const Classifier f = [=](const Point& x) {
      if (x.size() == 2) return x(1) > b ? s : -s;
      return x(0) > a ? s : -s;
    };
    const Quadrature q = quadrature_with_nodes(prob, 40000);
    const double quad = excess_risk(prob, f, q);
    const double mc = monte_carlo_excess(prob, f, 1000000, rng);
    CAPTURE(t);
    CHECK(std::abs(quad - mc) <= 3e-3);

    std::vector<double> g;
    for (const Point& x : q.nodes) g.push_back(f(x));
    CHECK(excess_risk_from_scores(prob, q, g) == doctest::Approx(quad).epsilon(1e-12));
    CHECK(quad <= disagreement_mass(prob, q, g) + 1e-15);
  }
}

TEST_CASE("margin_cdf examples") {
  const Problem gap = make_problem("power-gap-1d", 1.0, false);
  CHECK(margin_cdf(gap, 0.5) == doctest::Approx(2 * (0.5 - 0.1) / 1.8).epsilon(1e-12));
  CHECK(margin_cdf(gap, 0.1) == 0.0);
  CHECK(margin_cdf(gap, 0.05) == 0.0);
  CHECK(margin_cdf(gap, 5.0) <= 1.0);
  CHECK_THROWS_AS(margin_cdf(gap, 0.0), InputError);

  for (double p : {1.0, 2.0, 3.0}) {
    const Problem g = make_problem("power-gap-1d", p, false);
    CHECK(g.hard_margin() == doctest::Approx(std::pow(0.1, p)).epsilon(1e-15));
    CHECK(margin_cdf(g, std::pow(0.1, p)) == 0.0);
    CHECK(margin_cdf(g, 0.999 * std::pow(0.1, p)) == 0.0);
  }
}

TEST_CASE("margin condition conformance") {
  for (const char* name : kNames) {
    for (double p : {1.0, 2.0}) {
      const Problem prob = make_problem(name, p, false);
      CAPTURE(std::string(name));
      for (int k = 0; k <= 30; ++k) {
        const double t = std::pow(10.0, -3.0 + 0.1 * k);
        const double bound = std::isinf(prob.margin_exponent()) ? 0.0 : prob.margin_constant() * std::pow(t, prob.margin_exponent());
        if (std::isinf(prob.margin_exponent())) {
          if (t < prob.hard_margin()) CHECK(margin_cdf(prob, t) == 0.0);
        } else {
          CHECK(margin_cdf(prob, t) <= bound * (1 + 1e-12));
        }
      }
    }
  }
}

TEST_CASE("fitted margin exponent of power-full-1d") {
  for (double p : {0.5, 1.0, 2.0}) {
    const Problem prob = make_problem("power-full-1d", p, false);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = 21;
    for (int k = 0; k < m; ++k) {
      const double lt = std::log(10.0) * (-3.0 + 2.0 * k / (m - 1));
      const double lc = std::log(margin_cdf(prob, std::exp(lt)));
      sx += lt, sy += lc, sxx += lt * lt, sxy += lt * lc;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(std::abs(slope - prob.margin_exponent()) <= 0.1);
  }
}

TEST_CASE("sine-2d margin cdf by quadrature agrees with closed form") {
  const Problem sine = make_problem("sine-2d", 1.0, false);
  const Quadrature q = quadrature(sine, 1000);
  for (double t : {0.1, 0.4, 0.7, 0.95}) {
    double acc = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double a = std::abs(sine.eta(q.nodes[k]));
      if (a > 0.0 && a < t) acc += q.masses[k];
    }
    CHECK(std::abs(margin_cdf(sine, t) - acc) <= 2e-3);
  }
}

TEST_CASE("gap-step profile") {
  const Problem step = make_problem("gap-step-1d", 1.0, false);
  CHECK(step.eta(make_point({0.25})) == 0.05);
  CHECK(step.eta(make_point({0.75})) == 0.95);
  CHECK(step.eta(make_point({2.5})) == -0.95);
  REQUIRE(step.discontinuities().size() == 1);
  CHECK(step.discontinuities()[0] == 0.5);
  CHECK(step.hard_margin() == 0.05);
  const auto pos = step.decision_intervals(1);
  REQUIRE(pos.size() == 1);
  CHECK(pos[0].lo == 0.0);
  CHECK(pos[0].hi == 1.0);
}
