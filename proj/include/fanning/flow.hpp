#pragma once

#include "fanning/types.hpp"

namespace fanning {

/// Joint state of the geodesic system and the passive points it carries.
/// `y` may have zero rows, in which case only (c, alpha) evolve.
struct FlowState {
  ControlPoints c;
  Momenta alpha;
  ShapePoints y;

  bool all_finite() const { return c.allFinite() && alpha.allFinite() && y.allFinite(); }
};

/// Right-hand side: c' = K_c alpha, alpha' = -1/2 grad_c(alpha^T K_c alpha), y' = v(y).
FlowState flow_rhs(const FlowState& z, const KernelConfig& cfg);

/// One explicit Runge-Kutta step; order 2 is the midpoint rule, order 4 the classical scheme.
FlowState flow_step(const FlowState& z, double h, int order, const KernelConfig& cfg);

/// Vector-Jacobian product (d flow_rhs / dz)^T lambda, evaluated analytically.
FlowState flow_rhs_vjp(const FlowState& z, const FlowState& lambda, const KernelConfig& cfg);

/// Pulls the adjoint of flow_step(z) back onto z. Exact for the discrete step.
FlowState flow_step_vjp(const FlowState& z, double h, int order, const FlowState& lambda_next,
                        const KernelConfig& cfg);

}  // namespace fanning
