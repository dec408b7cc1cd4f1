#pragma once

#include <vector>

#include "fanning/types.hpp"

namespace fanning {

/// A point of the geodesic system: control points and their momenta.
struct GeodesicState {
  ControlPoints c;
  Momenta alpha;

  void validate() const;
};

struct IntegratorConfig {
  int steps = 10;
  int order = 2;

  void validate() const;
};

/// Discretized geodesic on [0, 1]: states[k] is the state at time k / N.
struct GeodesicPath {
  std::vector<GeodesicState> states;
  KernelConfig kernel;
  int order = 2;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  double step_size() const { return 1.0 / steps(); }
  const GeodesicState& initial() const { return states.front(); }
  const GeodesicState& final() const { return states.back(); }
};

/// Hamiltonian equations; `c` of the result holds c', `alpha` holds alpha'.
GeodesicState hamiltonian_rhs(const GeodesicState& s, const KernelConfig& cfg);

/// One explicit Runge-Kutta step of order 2 (midpoint) or 4 (classical).
/// Throws BlowUpError if the new state is not finite.
GeodesicState step(const GeodesicState& s, double h, int order, const KernelConfig& cfg);

/// Riemannian exponential: N uniform steps over [0, 1].
GeodesicPath shoot(const GeodesicState& s0, const IntegratorConfig& icfg, const KernelConfig& cfg);

/// Carries `shape` along the path, integrating it jointly with the control-point system
/// so Runge-Kutta stages stay consistent. Returns N + 1 shapes, one per time node.
std::vector<ShapePoints> flow_shape(const GeodesicPath& path, const ShapePoints& shape);

/// Kinetic energy alpha^T K_c alpha.
double energy(const GeodesicState& s, const KernelConfig& cfg);

}  // namespace fanning
