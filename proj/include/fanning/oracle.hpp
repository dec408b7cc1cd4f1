#pragma once

#include <vector>

#include "fanning/hamiltonian.hpp"
#include "fanning/types.hpp"

namespace fanning::oracle {

/// Brute-force parallel transport through the Christoffel symbols of the landmark metric
/// g = (K_c (x) I_d)^-1. Stacked coordinates use index i * d + a for point i, axis a.
/// Everything here is O((nd)^3) or worse and capped at nd <= kMaxDimension.

inline constexpr int kMaxDimension = 12;

/// Velocity representation of a tangent vector, v = K_c omega, one row per control point.
using TangentVector = Points;

Eigen::MatrixXd metric_tensor(const ControlPoints& c, const KernelConfig& kcfg);

/// Gamma^i_{kl}, symmetric in (k, l) by construction.
class Christoffel {
 public:
  explicit Christoffel(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int i, int k, int l) { return data_[(static_cast<std::size_t>(i) * dim_ + k) * dim_ + l]; }
  double operator()(int i, int k, int l) const {
    return data_[(static_cast<std::size_t>(i) * dim_ + k) * dim_ + l];
  }

  /// Gamma^i_{kl} u^k v^l for stacked vectors u, v.
  Eigen::VectorXd contract(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

 private:
  int dim_;
  std::vector<double> data_;
};

/// Default finite-difference step: 1e-5 * max(1, max |coordinate|).
double default_fd_step(const ControlPoints& c);

/// Metric derivatives by central differences of metric_tensor with step `fd_step`.
Christoffel christoffel(const ControlPoints& c, const KernelConfig& kcfg, double fd_step);

TangentVector momenta_to_tangent(const ControlPoints& c, const Momenta& omega, const KernelConfig& kcfg);
Momenta tangent_to_momenta(const ControlPoints& c, const TangentVector& w, const KernelConfig& kcfg);

/// g_c(w, w).
double metric_sq_norm(const ControlPoints& c, const TangentVector& w, const KernelConfig& kcfg);

struct TransportOdeResult {
  GeodesicState final_state;  ///< geodesic endpoint from the fine integration
  TangentVector tangent;      ///< transported vector at t = 1
};

/// Integrates X' = -Gamma(c)(c', X) jointly with the geodesic using `fine_steps` classical
/// fourth-order steps.
TransportOdeResult transport_ode(const GeodesicState& s0, const TangentVector& w0, int fine_steps,
                                 const KernelConfig& kcfg);

/// sqrt(g(w - w_ref, w - w_ref) / g(w_ref, w_ref)) with the metric at `c`.
double relative_metric_error(const ControlPoints& c, const TangentVector& w, const TangentVector& w_ref,
                             const KernelConfig& kcfg);

}  // namespace fanning::oracle
