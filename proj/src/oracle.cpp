#include "fanning/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fanning/kernel.hpp"

namespace fanning::oracle {

namespace {

int stacked_dim(const ControlPoints& c) { return static_cast<int>(c.rows() * c.cols()); }

void check_cap(const ControlPoints& c) {
  if (stacked_dim(c) > kMaxDimension) {
    throw std::invalid_argument("oracle limited to n*d <= " + std::to_string(kMaxDimension) + ", got " +
                                std::to_string(stacked_dim(c)));
  }
}

Eigen::VectorXd flatten(const Points& p) { return Eigen::Map<const Eigen::VectorXd>(p.data(), p.size()); }

Points unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Points>(v.data(), rows, cols);
}

}  // namespace

Eigen::MatrixXd metric_tensor(const ControlPoints& c, const KernelConfig& kcfg) {
  const Eigen::Index n = c.rows();
  const Eigen::Index d = c.cols();
  const KernelMatrix k = kernel_matrix(c, kcfg);
  const Eigen::LLT<KernelMatrix> llt(k);
  if (llt.info() != Eigen::Success) throw IllConditionedError("metric_tensor: kernel matrix is singular");
  const Eigen::MatrixXd k_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  if (!k_inv.allFinite() || (k * k_inv - Eigen::MatrixXd::Identity(n, n)).norm() > 1e-6) {
    throw IllConditionedError("metric_tensor: kernel matrix is numerically singular");
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index a = 0; a < d; ++a) g(i * d + a, j * d + a) = k_inv(i, j);
    }
  }
  return g;
}

Eigen::VectorXd Christoffel::contract(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) {
      for (int l = 0; l < dim_; ++l) s += (*this)(i, k, l) * u[k] * v[l];
    }
    out[i] = s;
  }
  return out;
}

double default_fd_step(const ControlPoints& c) {
  const double scale = c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
  return 1e-5 * std::max(1.0, scale);
}

Christoffel christoffel(const ControlPoints& c, const KernelConfig& kcfg, double fd_step) {
  check_cap(c);
  if (!(fd_step > 0.0)) throw std::invalid_argument("christoffel: fd_step must be positive");
  const int dim = stacked_dim(c);

  // dg[m](i, j) = d g_ij / d x^m
  std::vector<Eigen::MatrixXd> dg(dim);
  for (int m = 0; m < dim; ++m) {
    ControlPoints plus = c;
    ControlPoints minus = c;
    plus.data()[m] += fd_step;
    minus.data()[m] -= fd_step;
    dg[m] = (metric_tensor(plus, kcfg) - metric_tensor(minus, kcfg)) / (2.0 * fd_step);
  }

  // The inverse metric is K (x) I_d itself.
  const KernelMatrix k = kernel_matrix(c, kcfg);
  const Eigen::Index d = c.cols();
  auto g_inv = [&](int i, int m) { return (i % d == m % d) ? k(i / d, m / d) : 0.0; };

  Christoffel gamma(dim);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < dim; ++i) {
    for (int kk = 0; kk < dim; ++kk) {
      for (int l = kk; l < dim; ++l) {
        double s = 0.0;
        for (int m = 0; m < dim; ++m) {
          const double gim = g_inv(i, m);
          if (gim == 0.0) continue;
          s += gim * (dg[kk](m, l) + dg[l](m, kk) - dg[m](kk, l));
        }
        gamma(i, kk, l) = 0.5 * s;
        gamma(i, l, kk) = 0.5 * s;
      }
    }
  }
  return gamma;
}

TangentVector momenta_to_tangent(const ControlPoints& c, const Momenta& omega, const KernelConfig& kcfg) {
  return apply_kernel(c, omega, c, kcfg);
}

Momenta tangent_to_momenta(const ControlPoints& c, const TangentVector& w, const KernelConfig& kcfg) {
  return solve_kernel(c, w, kcfg, 0.0);
}

double metric_sq_norm(const ControlPoints& c, const TangentVector& w, const KernelConfig& kcfg) {
  return tangent_to_momenta(c, w, kcfg).cwiseProduct(w).sum();
}

TransportOdeResult transport_ode(const GeodesicState& s0, const TangentVector& w0, int fine_steps,
                                 const KernelConfig& kcfg) {
  s0.validate();
  kcfg.validate();
  check_cap(s0.c);
  require_same_shape(s0.c, w0, "transport_ode");
  if (fine_steps < 1000) throw std::invalid_argument("transport_ode: fine_steps must be >= 1000");

  const Eigen::Index n = s0.c.rows();
  const Eigen::Index d = s0.c.cols();
  const double fd_step = default_fd_step(s0.c);

  struct Joint {
    GeodesicState geo;
    Eigen::VectorXd x;
  };
  auto rhs = [&](const Joint& z) {
    Joint dz;
    dz.geo = hamiltonian_rhs(z.geo, kcfg);
    const Eigen::VectorXd velocity = flatten(dz.geo.c);
    dz.x = -christoffel(z.geo.c, kcfg, fd_step).contract(velocity, z.x);
    return dz;
  };
  auto shifted = [](const Joint& z, double a, const Joint& dz) {
    return Joint{{z.geo.c + a * dz.geo.c, z.geo.alpha + a * dz.geo.alpha}, z.x + a * dz.x};
  };

  Joint z{s0, flatten(w0)};
  const double h = 1.0 / fine_steps;
  for (int k = 0; k < fine_steps; ++k) {
    const Joint k1 = rhs(z);
    const Joint k2 = rhs(shifted(z, 0.5 * h, k1));
    const Joint k3 = rhs(shifted(z, 0.5 * h, k2));
    const Joint k4 = rhs(shifted(z, h, k3));
    z.geo.c += (h / 6.0) * (k1.geo.c + 2.0 * k2.geo.c + 2.0 * k3.geo.c + k4.geo.c);
    z.geo.alpha += (h / 6.0) * (k1.geo.alpha + 2.0 * k2.geo.alpha + 2.0 * k3.geo.alpha + k4.geo.alpha);
    z.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    if (!z.geo.c.allFinite() || !z.geo.alpha.allFinite() || !z.x.allFinite()) {
      throw BlowUpError("oracle transport produced a non-finite state", k);
    }
  }
  return {z.geo, unflatten(z.x, n, d)};
}

double relative_metric_error(const ControlPoints& c, const TangentVector& w, const TangentVector& w_ref,
                             const KernelConfig& kcfg) {
  const double ref = metric_sq_norm(c, w_ref, kcfg);
  const double diff = std::max(0.0, metric_sq_norm(c, w - w_ref, kcfg));
  if (ref == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / ref);
}

}  // namespace fanning::oracle
