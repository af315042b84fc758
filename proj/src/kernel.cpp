#include <svmlab/kernel.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace svmlab {

Point make_point(std::initializer_list<double> coords) {
  if (coords.size() == 0 || coords.size() > static_cast<std::size_t>(kMaxDim)) {
    throw InputError("point dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p(i++) = c;
  return p;
}

KernelSpec::KernelSpec(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InputError("kernel bandwidth must be positive and finite, got " + std::to_string(sigma));
  }
}

double kernel_eval(const Point& x, const Point& x2, const KernelSpec& spec) {
  if (x.size() != x2.size()) {
    throw InputError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(x2.size()) + ")");
  }
  const double s = spec.sigma();
  return std::exp(-(x - x2).squaredNorm() / (2.0 * s * s));
}

namespace {

Eigen::Index common_dimension(std::span<const Point> a, std::span<const Point> b) {
  const Eigen::Index d = a.front().size();
  auto bad = [d](const Point& p) { return p.size() != d; };
  if (std::any_of(a.begin(), a.end(), bad) || std::any_of(b.begin(), b.end(), bad)) {
    throw InputError("kernel: points have inconsistent dimensions");
  }
  return d;
}

}  // namespace

GramMatrix gram_matrix(std::span<const Point> points, const KernelSpec& spec) {
  if (points.empty()) throw InputError("gram_matrix: empty point list");
  common_dimension(points, points);
  const auto n = static_cast<Eigen::Index>(points.size());
  const double scale = -1.0 / (2.0 * spec.sigma() * spec.sigma());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = std::exp(scale * (points[i] - points[j]).squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return GramMatrix(std::move(k));
}

Eigen::MatrixXd cross_kernel(std::span<const Point> rows, std::span<const Point> cols, const KernelSpec& spec) {
  if (rows.empty() || cols.empty()) return Eigen::MatrixXd(rows.size(), cols.size());
  common_dimension(rows, cols);
  const double scale = -1.0 / (2.0 * spec.sigma() * spec.sigma());
  Eigen::MatrixXd k(rows.size(), cols.size());
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      k(i, j) = std::exp(scale * (rows[i] - cols[j]).squaredNorm());
    }
  }
  return k;
}

}  // namespace svmlab
