#include "fanning/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fanning {

void KernelConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("kernel width sigma must be positive and finite");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw std::invalid_argument("kernel ridge must be non-negative");
  }
}

void require_same_shape(const Points& a, const Points& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

namespace {

inline double squared_distance(const double* x, const double* y, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double diff = x[k] - y[k];
    s += diff * diff;
  }
  return s;
}

void require_query_dim(const Points& c, const Points& query) {
  if (query.rows() > 0 && query.cols() != c.cols()) {
    throw std::invalid_argument("apply_kernel: query dimension does not match control points");
  }
}

}  // namespace

double kernel_value(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                    const Eigen::Ref<const Eigen::RowVectorXd>& y, const KernelConfig& cfg) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel_value: dimension mismatch");
  return std::exp(-squared_distance(x.data(), y.data(), x.size()) / (2.0 * cfg.sigma * cfg.sigma));
}

KernelMatrix kernel_matrix(const ControlPoints& c, const KernelConfig& cfg) {
  const Eigen::Index n = c.rows();
  const Eigen::Index d = c.cols();
  const double inv_two_var = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  KernelMatrix k(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* ci = c.data() + i * d;
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = std::exp(-squared_distance(ci, c.data() + j * d, d) * inv_two_var);
    }
  }
  return k;
}

Points apply_kernel(const ControlPoints& c, const Momenta& alpha, const Points& query,
                    const KernelConfig& cfg) {
  require_same_shape(c, alpha, "apply_kernel");
  require_query_dim(c, query);
  const Eigen::Index n = c.rows();
  const Eigen::Index d = c.cols();
  const Eigen::Index m = query.rows();
  const double inv_two_var = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  Points out = Points::Zero(m, d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index p = 0; p < m; ++p) {
    const double* y = query.data() + p * d;
    double* o = out.data() + p * d;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = std::exp(-squared_distance(y, c.data() + j * d, d) * inv_two_var);
      const double* a = alpha.data() + j * d;
      for (Eigen::Index k = 0; k < d; ++k) o[k] += w * a[k];
    }
  }
  return out;
}

Points energy_gradient(const ControlPoints& c, const Momenta& alpha, const KernelConfig& cfg) {
  require_same_shape(c, alpha, "energy_gradient");
  const Eigen::Index n = c.rows();
  const Eigen::Index d = c.cols();
  const double inv_var = 1.0 / (cfg.sigma * cfg.sigma);
  const double inv_two_var = 0.5 * inv_var;
  Points grad = Points::Zero(n, d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* ci = c.data() + i * d;
    const double* ai = alpha.data() + i * d;
    double* g = grad.data() + i * d;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* cj = c.data() + j * d;
      const double* aj = alpha.data() + j * d;
      double dot = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) dot += ai[k] * aj[k];
      const double w = -2.0 * dot * inv_var * std::exp(-squared_distance(ci, cj, d) * inv_two_var);
      for (Eigen::Index k = 0; k < d; ++k) g[k] += w * (ci[k] - cj[k]);
    }
  }
  return grad;
}

Momenta solve_kernel(const ControlPoints& c, const Points& v, const KernelConfig& cfg, double ridge) {
  require_same_shape(c, v, "solve_kernel");
  if (!(ridge >= 0.0)) throw std::invalid_argument("solve_kernel: ridge must be non-negative");
  KernelMatrix k = kernel_matrix(c, cfg);
  if (ridge > 0.0) k.diagonal().array() += ridge;

  const double v_norm = v.norm();
  if (v_norm == 0.0) return Momenta::Zero(v.rows(), v.cols());

  const Eigen::LLT<KernelMatrix> llt(k);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("kernel matrix is not numerically positive definite (near-coincident control points?)");
  }
  Momenta omega = llt.solve(v);
  const double residual = (k * omega - v).norm() / v_norm;
  if (!(residual <= 1e-6)) {
    throw IllConditionedError("kernel solve residual " + std::to_string(residual) +
                              " exceeds 1e-6 (near-coincident control points?)");
  }
  return omega;
}

Momenta solve_kernel(const ControlPoints& c, const Points& v, const KernelConfig& cfg) {
  return solve_kernel(c, v, cfg, cfg.ridge);
}

double kernel_inner(const KernelMatrix& k, const Momenta& u, const Momenta& v) {
  if (u.rows() != k.rows() || v.rows() != k.rows() || u.cols() != v.cols()) {
    throw std::invalid_argument("kernel_inner: dimension mismatch");
  }
  const Points kv = k * v;
  return u.cwiseProduct(kv).sum();
}

double kernel_inner(const ControlPoints& c, const Momenta& u, const Momenta& v, const KernelConfig& cfg) {
  return kernel_inner(kernel_matrix(c, cfg), u, v);
}

double relative_kernel_error(const ControlPoints& c, const Momenta& a, const Momenta& b,
                             const KernelConfig& cfg) {
  const KernelMatrix k = kernel_matrix(c, cfg);
  const Momenta diff = a - b;
  const double ref = kernel_inner(k, b, b);
  const double num = std::max(0.0, kernel_inner(k, diff, diff));
  if (ref == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / ref);
}

}  // namespace fanning
