#pragma once

#include <string>
#include <vector>

#include "fanning/hamiltonian.hpp"
#include "fanning/transport.hpp"
#include "fanning/types.hpp"

namespace fanning {

struct TimedShape {
  ShapePoints shape;
  double time = 0.0;
  std::string label;
};

struct FitConfig {
  int max_iters = 500;
  double step_size = 0.1;
  /// Stop once an accepted step decreases the loss by less than this relative amount.
  double tolerance = 1e-10;
  IntegratorConfig integrator;
  bool optimize_control_points = false;

  void validate() const;
};

struct FitResult {
  GeodesicState state;
  std::vector<double> loss_history;  ///< initial loss, then one entry per accepted step
  int iterations = 0;

  double initial_loss() const { return loss_history.front(); }
  double final_loss() const { return loss_history.back(); }
};

/// Onset and pace of a subject relative to the reference trajectory.
struct TimeReparam {
  double onset = 0.0;
  double pace = 1.0;

  void validate() const;
};

/// Sum over corresponded points of squared distances.
double landmark_loss(const ShapePoints& deformed, const ShapePoints& target);

/// Root mean squared point distance.
double rmse(const ShapePoints& predicted, const ShapePoints& observed);

/// A corresponded observation attached to a node of the time grid.
struct NodeObservation {
  int node = 0;
  ShapePoints target;
};

struct LossAndGradient {
  double loss = 0.0;
  ControlPoints grad_c;
  Momenta grad_alpha;
};

/// Loss sum_j |y(node_j) - target_j|^2 of the baseline carried by the discrete flow of s0,
/// with its exact gradient obtained by reverse accumulation through the integrator steps.
LossAndGradient flow_loss_gradient(const GeodesicState& s0, const ShapePoints& baseline,
                                   const std::vector<NodeObservation>& observations,
                                   const IntegratorConfig& icfg, const KernelConfig& kcfg);

/// Gradient descent with backtracking on the momenta (and optionally control points) that
/// carry `source` onto `target` at t = 1. Momenta start at zero.
FitResult register_shapes(const ShapePoints& source, const ShapePoints& target, const ControlPoints& c0,
                          const FitConfig& fcfg, const KernelConfig& kcfg);

/// Least-squares geodesic through time-indexed shapes. Observation times are mapped
/// affinely to [0, 1] and snapped to the nearest node of the integration grid.
FitResult geodesic_regression(const ShapePoints& baseline, const std::vector<TimedShape>& observations,
                              const ControlPoints& c0, const FitConfig& fcfg, const KernelConfig& kcfg);

/// Transports omega0 along the reference and, at every requested time, deforms the
/// reference shape at that time by the exponential of the transported momenta.
/// The transport reuses the reference grid: `tcfg.steps` and `tcfg.main_order` are
/// taken from the path.
std::vector<ShapePoints> exp_parallelize(const GeodesicPath& reference, const Momenta& omega0,
                                         const std::vector<double>& eval_times, const ShapePoints& shape,
                                         const TransportConfig& tcfg, const KernelConfig& kcfg);

/// Maps a subject time onto the reference time axis: t_ref_baseline + pace * (t - onset).
double reparametrize_time(double t_subject, const TimeReparam& rp, double t_ref_baseline);

/// Index of the grid node nearest to t in [0, 1].
int nearest_node(double t, int steps);

}  // namespace fanning
