#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fanning {

/// n points in R^d, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Control points, momenta and passive shape points all share the row-per-point layout.
using ControlPoints = Points;
using Momenta = Points;
using ShapePoints = Points;

/// Width of the Gaussian kernel k(x, y) = exp(-|x - y|^2 / (2 sigma^2)).
struct KernelConfig {
  double sigma = 1.0;
  /// Tikhonov term added to the kernel matrix in linear solves. Zero means an exact solve.
  double ridge = 0.0;

  void validate() const;
};

/// Base class for failures of the numerics (blow-up, ill-conditioning, infeasible
/// corrections). The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditionedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A non-finite value appeared while integrating; `step_index` is the failing step.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, int step_index)
      : NumericalError(what + " (step " + std::to_string(step_index) + ")"), step_index_(step_index) {}

  int step_index() const noexcept { return step_index_; }

 private:
  int step_index_;
};

class InfeasibleCorrectionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

void require_same_shape(const Points& a, const Points& b, const char* what);

}  // namespace fanning
