#pragma once

#include <svmlab/core.hpp>

#include <Eigen/Core>

#include <span>
#include <vector>

namespace svmlab {

/// Gaussian kernel k(x, x') = exp(-|x - x'|^2 / (2 sigma^2)).
///
/// Only the Gaussian kernel ships; KernelSpec carries its bandwidth so that
/// solvers and diagnostics (Lipschitz certificates) can read it.
class KernelSpec {
 public:
  explicit KernelSpec(double sigma);

  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

double kernel_eval(const Point& x, const Point& x2, const KernelSpec& spec);

/// Dense symmetric Gram matrix with unit diagonal.
///
/// Memory is O(n^2); the largest intended use is the 100 x 100 training lattice
/// (10^4 distinct points, 800 MB).
class GramMatrix {
 public:
  GramMatrix() = default;
  explicit GramMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

  Eigen::Index order() const noexcept { return entries_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

GramMatrix gram_matrix(std::span<const Point> points, const KernelSpec& spec);

/// Rectangular cross-kernel K(rows, cols), used for batch prediction.
Eigen::MatrixXd cross_kernel(std::span<const Point> rows, std::span<const Point> cols, const KernelSpec& spec);

}  // namespace svmlab
