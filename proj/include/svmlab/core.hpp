#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace svmlab {

inline constexpr int kMaxDim = 3;

/// Input-space point. Stored inline (no heap allocation) for dimensions up to kMaxDim.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

Point make_point(std::initializer_list<double> coords);

/// Bad argument supplied by the caller (dimension mismatch, empty input, bad name).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A hypothesis of a lemma or bound does not hold for the supplied arguments.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver stopped at its sweep budget before meeting the KKT tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double kkt_residual, double duality_gap)
      : std::runtime_error(what), kkt_residual_(kkt_residual), duality_gap_(duality_gap) {}

  double kkt_residual() const noexcept { return kkt_residual_; }
  double duality_gap() const noexcept { return duality_gap_; }

 private:
  double kkt_residual_;
  double duality_gap_;
};

/// sign with the fixed tie-break sign(0) = +1.
constexpr int sign_of(double v) noexcept { return v >= 0.0 ? 1 : -1; }

}  // namespace svmlab
