#include "fanning/hamiltonian.hpp"

#include <string>

#include "fanning/flow.hpp"
#include "fanning/kernel.hpp"

namespace fanning {

void GeodesicState::validate() const {
  if (c.rows() < 1) throw std::invalid_argument("geodesic state needs at least one control point");
  require_same_shape(c, alpha, "geodesic state");
  if (!c.allFinite() || !alpha.allFinite()) throw std::invalid_argument("geodesic state is not finite");
}

void IntegratorConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("integrator steps must be >= 1");
  if (order != 2 && order != 4) throw std::invalid_argument("integrator order must be 2 or 4");
}

GeodesicState hamiltonian_rhs(const GeodesicState& s, const KernelConfig& cfg) {
  const FlowState dz = flow_rhs({s.c, s.alpha, ShapePoints(0, s.c.cols())}, cfg);
  return {dz.c, dz.alpha};
}

namespace {

GeodesicState checked_step(const GeodesicState& s, double h, int order, const KernelConfig& cfg,
                           int index) {
  FlowState next = flow_step({s.c, s.alpha, ShapePoints(0, s.c.cols())}, h, order, cfg);
  if (!next.all_finite()) throw BlowUpError("geodesic integration produced a non-finite state", index);
  return {std::move(next.c), std::move(next.alpha)};
}

}  // namespace

GeodesicState step(const GeodesicState& s, double h, int order, const KernelConfig& cfg) {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  return checked_step(s, h, order, cfg, 0);
}

GeodesicPath shoot(const GeodesicState& s0, const IntegratorConfig& icfg, const KernelConfig& cfg) {
  s0.validate();
  icfg.validate();
  cfg.validate();
  GeodesicPath path;
  path.kernel = cfg;
  path.order = icfg.order;
  path.states.reserve(icfg.steps + 1);
  path.states.push_back(s0);
  const double h = 1.0 / icfg.steps;
  for (int k = 0; k < icfg.steps; ++k) {
    path.states.push_back(checked_step(path.states.back(), h, icfg.order, cfg, k));
  }
  return path;
}

std::vector<ShapePoints> flow_shape(const GeodesicPath& path, const ShapePoints& shape) {
  if (path.states.size() < 2) throw std::invalid_argument("flow_shape: path has no steps");
  if (path.order != 2 && path.order != 4) throw std::invalid_argument("flow_shape: path order must be 2 or 4");
  if (shape.rows() > 0 && shape.cols() != path.initial().c.cols()) {
    throw std::invalid_argument("flow_shape: shape dimension does not match control points");
  }
  if (!shape.allFinite()) throw std::invalid_argument("flow_shape: shape points are not finite");

  const double h = path.step_size();
  std::vector<ShapePoints> out;
  out.reserve(path.states.size());
  out.push_back(shape);
  for (int k = 0; k < path.steps(); ++k) {
    const GeodesicState& s = path.states[k];
    FlowState next = flow_step({s.c, s.alpha, out.back()}, h, path.order, path.kernel);
    if (!next.y.allFinite()) throw BlowUpError("shape flow produced a non-finite point", k);
    out.push_back(std::move(next.y));
  }
  return out;
}

double energy(const GeodesicState& s, const KernelConfig& cfg) {
  return kernel_inner(s.c, s.alpha, s.alpha, cfg);
}

}  // namespace fanning
