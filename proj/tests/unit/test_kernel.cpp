#include <doctest.h>

#include <svmlab/kernel.hpp>
#include <svmlab/random.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

using namespace svmlab;

TEST_CASE("kernel_eval examples") {
  const KernelSpec k02(0.2);
  const Point x = make_point({0.3, -0.7});
  CHECK(kernel_eval(x, x, k02) == 1.0);

  const KernelSpec ks(0.37);
  CHECK(kernel_eval(make_point({0.0}), make_point({0.37}), ks) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(kernel_eval(make_point({0.0}), make_point({0.37}), ks) == doctest::Approx(0.60653).epsilon(1e-5));
}

TEST_CASE("kernel_eval symmetry, range and monotonicity") {
  Rng rng(7);
  const KernelSpec spec(0.5);
  for (int t = 0; t < 100; ++t) {
    const Point a = make_point({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const Point b = make_point({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double kab = kernel_eval(a, b, spec);
    CHECK(kab == kernel_eval(b, a, spec));
    CHECK(kab > 0.0);
    CHECK(kab < 1.0);

    const Point c = make_point({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double dab = (a - b).norm();
    const double dac = (a - c).norm();
    if (dab < dac) CHECK(kab > kernel_eval(a, c, spec));
    if (dac < dab) CHECK(kernel_eval(a, c, spec) > kab);

    const double s = rng.uniform(0.1, 10.0);
    const Point sa = s * a;
    const Point sb = s * b;
    CHECK(kernel_eval(sa, sb, KernelSpec(0.5 * s)) == doctest::Approx(kab).epsilon(1e-12));
  }
}

TEST_CASE("kernel input errors") {
  CHECK_THROWS_AS(KernelSpec(0.0), InputError);
  CHECK_THROWS_AS(KernelSpec(-1.0), InputError);
  CHECK_THROWS_AS(kernel_eval(make_point({0.0}), make_point({0.0, 1.0}), KernelSpec(1.0)), InputError);
  const std::vector<Point> none;
  CHECK_THROWS_AS(gram_matrix(none, KernelSpec(1.0)), InputError);
}

TEST_CASE("gram_matrix examples") {
  const KernelSpec spec(0.3);
  const std::vector<Point> one{make_point({0.1})};
  const GramMatrix g1 = gram_matrix(one, spec);
  REQUIRE(g1.order() == 1);
  CHECK(g1(0, 0) == 1.0);

  const std::vector<Point> twins{make_point({0.4, 0.2}), make_point({0.4, 0.2})};
  const GramMatrix g2 = gram_matrix(twins, spec);
  CHECK(g2.matrix().isApproxToConstant(1.0, 0.0));

  Rng rng(11);
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(make_point({rng.uniform(), rng.uniform()}));
  const GramMatrix g5 = gram_matrix(pts, spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g5.matrix());
  CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
  for (int i = 0; i < 5; ++i) {
    CHECK(g5(i, i) == 1.0);
    for (int j = 0; j < 5; ++j) {
      CHECK(g5(i, j) == g5(j, i));
      CHECK(g5(i, j) == doctest::Approx(kernel_eval(pts[i], pts[j], spec)).epsilon(1e-14));
    }
  }
}

TEST_CASE("gram_matrix is PSD on a larger random set") {
  Rng rng(3);
  std::vector<Point> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(make_point({rng.uniform(-1, 1)}));
  const GramMatrix g = gram_matrix(pts, KernelSpec(0.2));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.matrix());
  CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * 60);
}

TEST_CASE("cross_kernel matches kernel_eval") {
  const KernelSpec spec(0.25);
  const std::vector<Point> rows{make_point({0.0}), make_point({0.5})};
  const std::vector<Point> cols{make_point({0.1}), make_point({-0.2}), make_point({0.9})};
  const Eigen::MatrixXd c = cross_kernel(rows, cols, spec);
  REQUIRE(c.rows() == 2);
  REQUIRE(c.cols() == 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(c(i, j) == doctest::Approx(kernel_eval(rows[i], cols[j], spec)).epsilon(1e-15));
}
