#include <doctest.h>

#include <svmlab/kernel.hpp>
#include <svmlab/random.hpp>
#include <svmlab/solvers.hpp>

#include <support/dual_oracle.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace svmlab;
using svmlab::testing::DualOracle;

namespace {

Dataset random_dataset(Rng& rng, int n, int dim) {
  Dataset d;
  for (int i = 0; i < n; ++i) {
    Point x(dim);
    for (int k = 0; k < dim; ++k) x(k) = rng.uniform(-1, 1);
    d.add(x, rng.uniform() < 0.5 ? -1 : 1, rng.uniform(0.5, 2.0));
  }
  return d;
}

Dataset one_sample(double y) {
  Dataset d;
  d.add(make_point({0.3}), y > 0 ? 1 : -1, 1.0);
  return d;
}

}  // namespace

TEST_CASE("train_svm single-sample closed forms") {
  const KernelSpec k(0.5);
  SolverConfig c;
  c.lambda = 0.1;
  CHECK(train_svm(one_sample(1), k, c).predict(make_point({0.3})) == doctest::Approx(1.0).epsilon(1e-9));
  c.lambda = 1.0;
  CHECK(train_svm(one_sample(1), k, c).predict(make_point({0.3})) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("train_svm two symmetric samples match a 2001^2 grid") {
  Dataset d;
  d.add(make_point({-1.0}), -1);
  d.add(make_point({1.0}), 1);
  const KernelSpec k(1.0);
  SolverConfig c;
  c.lambda = 0.05;
  const TrainingResult r = fit_svm(d, k, c);
  REQUIRE(r.stats.converged);

  const DualOracle oracle(d, k, c.lambda);
  CHECK(std::abs(r.stats.dual_objective - oracle.grid_max(2001, 1)) <= 1e-4);

  const auto& a = r.model.coefficients();
  REQUIRE(a.size() == 2);
  CHECK(a[0] == doctest::Approx(a[1]).epsilon(1e-6));
  CHECK(std::abs(r.model.predict(make_point({0.0}))) <= 1e-6);
}

TEST_CASE("train_svm matches the grid oracle for n <= 3") {
  Rng rng(20240);
  for (int inst = 0; inst < 30; ++inst) {
    const int n = 1 + inst % 3;
    const Dataset d = random_dataset(rng, n, 1);
    const KernelSpec k(rng.uniform(0.1, 1.0));
    SolverConfig c;
    c.lambda = std::pow(10.0, rng.uniform(-3, 0));
    c.seed = static_cast<std::uint64_t>(inst);
    const TrainingResult r = fit_svm(d, k, c);
    REQUIRE(r.stats.converged);
    const DualOracle oracle(d, k, c.lambda);
    CAPTURE(inst);
    CHECK(std::abs(r.stats.dual_objective - oracle.grid_max(41, 30)) <= 1e-4);
  }
}

TEST_CASE("hinge duality gap and box constraints") {
  Rng rng(5);
  for (int inst = 0; inst < 5; ++inst) {
    const Dataset d = random_dataset(rng, 80, 2);
    SolverConfig c;
    c.lambda = 1e-3;
    const TrainingResult r = fit_svm(d, KernelSpec(0.3), c);
    REQUIRE(r.stats.converged);
    CHECK(r.stats.kkt_residual <= c.tolerance);
    CHECK(r.stats.primal_objective - r.stats.dual_objective <= c.tolerance);
    CHECK(r.stats.primal_objective == doctest::Approx(hinge_objective(r.model, d, c.lambda)).epsilon(1e-10));
    const double w = d.total_weight();
    const double wmax = *std::max_element(d.weights.begin(), d.weights.end());
    for (double a : r.model.coefficients()) {
      CHECK(a >= 0.0);
      CHECK(a <= wmax / (2.0 * c.lambda * w) * (1 + 1e-12));
    }
  }
}

TEST_CASE("duplicated unit rows equal one row of weight two") {
  Rng rng(9);
  Dataset a = random_dataset(rng, 15, 1);
  for (auto& w : a.weights) w = 1.0;
  Dataset b = a;
  a.add(a.points[4], a.labels[4], 1.0);
  b.weights[4] = 2.0;
  SolverConfig c;
  c.lambda = 1e-2;
  const KernelSpec k(0.3);
  const TrainedModel ma = train_svm(a, k, c);
  const TrainedModel mb = train_svm(b, k, c);
  const TrainedModel ka = train_krr(a, k, c);
  const TrainedModel kb = train_krr(b, k, c);
  for (double x = -1.0; x <= 1.0; x += 0.05) {
    const Point p = make_point({x});
    CHECK(ma.predict(p) == doctest::Approx(mb.predict(p)).epsilon(1e-8));
    CHECK(ka.predict(p) == doctest::Approx(kb.predict(p)).epsilon(1e-8));
  }
}

TEST_CASE("rkhs norm is non-increasing in lambda") {
  Rng rng(13);
  const Dataset d = random_dataset(rng, 60, 1);
  const KernelSpec k(0.2);
  double prev_svm = INFINITY;
  double prev_krr = INFINITY;
  for (double lambda : {1e-4, 1e-3, 1e-2, 1e-1}) {
    SolverConfig c;
    c.lambda = lambda;
    const double s = train_svm(d, k, c).rkhs_norm_squared();
    const double r = train_krr(d, k, c).rkhs_norm_squared();
    CHECK(s <= prev_svm * (1 + 1e-6));
    CHECK(r <= prev_krr * (1 + 1e-9));
    prev_svm = s;
    prev_krr = r;
  }
}

TEST_CASE("degenerate single-class data trains") {
  Dataset d;
  for (double x : {-0.5, 0.0, 0.5}) d.add(make_point({x}), -1);
  SolverConfig c;
  c.lambda = 0.01;
  const TrainedModel m = train_svm(d, KernelSpec(0.4), c);
  CHECK(m.classify(make_point({0.0})) == -1);
}

TEST_CASE("non-convergence raises ConvergenceError") {
  Rng rng(17);
  const Dataset d = random_dataset(rng, 300, 1);
  SolverConfig c;
  c.lambda = 1e-7;
  c.tolerance = 1e-15;
  c.max_sweeps = 1;
  CHECK_THROWS_AS(train_svm(d, KernelSpec(0.05), c), ConvergenceError);
  const TrainingResult r = fit_svm(d, KernelSpec(0.05), c);
  CHECK_FALSE(r.stats.converged);
  CHECK(r.stats.kkt_residual > c.tolerance);
}

TEST_CASE("train_krr closed forms") {
  const KernelSpec k(0.5);
  SolverConfig c;
  c.lambda = 1.0;
  CHECK(train_krr(one_sample(1), k, c).predict(make_point({0.3})) == doctest::Approx(0.5).epsilon(1e-12));
  c.lambda = 1e-6;
  CHECK(std::abs(train_krr(one_sample(1), k, c).predict(make_point({0.3})) - 1.0 / (1.0 + 1e-6)) <= 1e-12);
}

TEST_CASE("train_krr is optimal against perturbations and finite differences") {
  Rng rng(21);
  const Dataset d = random_dataset(rng, 20, 1);
  const KernelSpec k(0.3);
  SolverConfig c;
  c.lambda = 1e-2;
  const TrainedModel m = train_krr(d, k, c);
  const double best = least_squares_objective(m, d, c.lambda);

  auto with = [&](std::vector<double> coef) {
    return TrainedModel(m.anchors(), std::move(coef), m.labels(), m.kernel(), Surrogate::least_squares);
  };
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> coef = m.coefficients();
    const double scale = std::pow(10.0, rng.uniform(-6, 0));
    for (auto& a : coef) a += scale * rng.normal();
    CHECK(least_squares_objective(with(coef), d, c.lambda) >= best - 1e-12);
  }

  const double h = 1e-4;
  for (int t = 0; t < 5; ++t) {
    const std::size_t j = rng.below(m.coefficients().size());
    std::vector<double> up = m.coefficients();
    std::vector<double> down = up;
    up[j] += h;
    down[j] -= h;
    const double grad =
        (least_squares_objective(with(up), d, c.lambda) - least_squares_objective(with(down), d, c.lambda)) / (2 * h);
    CHECK(std::abs(grad) <= 1e-6);
  }
}

TEST_CASE("predict and classify") {
  const std::vector<Point> anchors{make_point({0.0}), make_point({1.0})};
  const TrainedModel zero(anchors, {0.0, 0.0}, {1, -1}, KernelSpec(0.3), Surrogate::hinge);
  CHECK(zero.predict(make_point({0.4})) == 0.0);
  CHECK(zero.classify(make_point({0.4})) == 1);

  const TrainedModel unit({make_point({0.2})}, {1.0}, {1}, KernelSpec(0.3), Surrogate::hinge);
  CHECK(unit.predict(make_point({0.2})) == 1.0);

  const TrainedModel pos({make_point({0.2})}, {0.3}, {1}, KernelSpec(0.3), Surrogate::hinge);
  const TrainedModel neg({make_point({0.2})}, {0.3}, {-1}, KernelSpec(0.3), Surrogate::hinge);
  CHECK(pos.classify(make_point({0.2})) == 1);
  CHECK(neg.classify(make_point({0.2})) == -1);

  CHECK_THROWS_AS(unit.predict(make_point({0.2, 0.1})), InputError);
  const std::vector<Point> xs{make_point({0.2}), make_point({0.5})};
  const auto batch = unit.predict(xs);
  CHECK(batch[1] == doctest::Approx(unit.predict(xs[1])).epsilon(1e-15));
}

TEST_CASE("dataset and config validation") {
  Dataset d;
  CHECK_THROWS_AS(d.validate(), InputError);
  d.add(make_point({0.0}), 1, 0.0);
  CHECK_THROWS_AS(d.validate(), InputError);
  d.weights[0] = 1.0;
  d.labels[0] = 0;
  CHECK_THROWS_AS(d.validate(), InputError);
  SolverConfig c;
  c.lambda = -1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c.lambda = 1.0;
  c.tolerance = 0.0;
  CHECK_THROWS_AS(c.validate(), InputError);
}
