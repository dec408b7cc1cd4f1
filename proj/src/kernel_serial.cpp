#include "fanning/kernel.hpp"

#include <cmath>

namespace fanning::serial {

KernelMatrix kernel_matrix(const ControlPoints& c, const KernelConfig& cfg) {
  const Eigen::Index n = c.rows();
  KernelMatrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = kernel_value(c.row(i), c.row(j), cfg);
    }
  }
  return k;
}

Points apply_kernel(const ControlPoints& c, const Momenta& alpha, const Points& query,
                    const KernelConfig& cfg) {
  require_same_shape(c, alpha, "serial::apply_kernel");
  Points out = Points::Zero(query.rows(), c.cols());
  for (Eigen::Index p = 0; p < query.rows(); ++p) {
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      out.row(p) += kernel_value(query.row(p), c.row(j), cfg) * alpha.row(j);
    }
  }
  return out;
}

Points energy_gradient(const ControlPoints& c, const Momenta& alpha, const KernelConfig& cfg) {
  require_same_shape(c, alpha, "serial::energy_gradient");
  const double var = cfg.sigma * cfg.sigma;
  Points grad = Points::Zero(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double k = kernel_value(c.row(i), c.row(j), cfg);
      grad.row(i) += 2.0 * alpha.row(i).dot(alpha.row(j)) * k * (-(c.row(i) - c.row(j)) / var);
    }
  }
  return grad;
}

}  // namespace fanning::serial
