#include "fanning/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fanning/flow.hpp"
#include "fanning/kernel.hpp"

namespace fanning {

void FitConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("fit max_iters must be >= 1");
  if (!(step_size > 0.0)) throw std::invalid_argument("fit step_size must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("fit tolerance must be positive");
  integrator.validate();
}

void TimeReparam::validate() const {
  if (!(pace > 0.0)) throw std::invalid_argument("time reparametrization pace must be positive");
  if (!std::isfinite(onset)) throw std::invalid_argument("time reparametrization onset must be finite");
}

double landmark_loss(const ShapePoints& deformed, const ShapePoints& target) {
  require_same_shape(deformed, target, "landmark_loss");
  return (deformed - target).squaredNorm();
}

double rmse(const ShapePoints& predicted, const ShapePoints& observed) {
  require_same_shape(predicted, observed, "rmse");
  if (predicted.rows() == 0) throw std::invalid_argument("rmse: empty point sets");
  return std::sqrt(landmark_loss(predicted, observed) / static_cast<double>(predicted.rows()));
}

int nearest_node(double t, int steps) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("time " + std::to_string(t) + " outside [0, 1]");
  return static_cast<int>(std::lround(t * steps));
}

LossAndGradient flow_loss_gradient(const GeodesicState& s0, const ShapePoints& baseline,
                                   const std::vector<NodeObservation>& observations,
                                   const IntegratorConfig& icfg, const KernelConfig& kcfg) {
  const int n_steps = icfg.steps;
  const double h = 1.0 / n_steps;

  std::vector<FlowState> nodes;
  nodes.reserve(n_steps + 1);
  nodes.push_back({s0.c, s0.alpha, baseline});
  for (int k = 0; k < n_steps; ++k) {
    nodes.push_back(flow_step(nodes.back(), h, icfg.order, kcfg));
    if (!nodes.back().all_finite()) throw BlowUpError("flow produced a non-finite state", k);
  }

  LossAndGradient out;
  std::vector<ShapePoints> residual_at(n_steps + 1, ShapePoints::Zero(baseline.rows(), baseline.cols()));
  for (const NodeObservation& obs : observations) {
    const ShapePoints r = nodes[obs.node].y - obs.target;
    out.loss += r.squaredNorm();
    residual_at[obs.node] += 2.0 * r;
  }

  FlowState lambda{ControlPoints::Zero(s0.c.rows(), s0.c.cols()), Momenta::Zero(s0.c.rows(), s0.c.cols()),
                   residual_at[n_steps]};
  for (int k = n_steps - 1; k >= 0; --k) {
    lambda = flow_step_vjp(nodes[k], h, icfg.order, lambda, kcfg);
    lambda.y += residual_at[k];
  }
  out.grad_c = std::move(lambda.c);
  out.grad_alpha = std::move(lambda.alpha);
  return out;
}

namespace {

double loss_only(const GeodesicState& s0, const ShapePoints& baseline,
                 const std::vector<NodeObservation>& observations, const IntegratorConfig& icfg,
                 const KernelConfig& kcfg) {
  const double h = 1.0 / icfg.steps;
  FlowState z{s0.c, s0.alpha, baseline};
  double loss = 0.0;
  for (int k = 0; k <= icfg.steps; ++k) {
    for (const NodeObservation& obs : observations) {
      if (obs.node == k) loss += (z.y - obs.target).squaredNorm();
    }
    if (k < icfg.steps) z = flow_step(z, h, icfg.order, kcfg);
    if (!z.all_finite()) return std::numeric_limits<double>::infinity();
  }
  return loss;
}

// Gradient descent with backtracking: halve the step until the loss decreases, grow it by
// half again after every accepted step.
FitResult fit(const ShapePoints& baseline, const std::vector<NodeObservation>& observations,
              const ControlPoints& c0, const FitConfig& fcfg, const KernelConfig& kcfg) {
  constexpr int kMaxHalvings = 30;
  constexpr double kExpand = 1.5;

  FitResult result;
  result.state = {c0, Momenta::Zero(c0.rows(), c0.cols())};
  LossAndGradient current = flow_loss_gradient(result.state, baseline, observations, fcfg.integrator, kcfg);
  result.loss_history.push_back(current.loss);

  double step_size = fcfg.step_size;
  for (int it = 0; it < fcfg.max_iters && current.loss > 0.0; ++it) {
    GeodesicState trial;
    double trial_loss = std::numeric_limits<double>::infinity();
    bool all_non_finite = true;
    int halvings = 0;
    for (;; ++halvings) {
      if (halvings > kMaxHalvings) break;
      trial.c = fcfg.optimize_control_points ? ControlPoints(result.state.c - step_size * current.grad_c)
                                             : result.state.c;
      trial.alpha = result.state.alpha - step_size * current.grad_alpha;
      trial_loss = loss_only(trial, baseline, observations, fcfg.integrator, kcfg);
      if (std::isfinite(trial_loss) && trial_loss < current.loss) break;
      all_non_finite = all_non_finite && !std::isfinite(trial_loss);
      step_size *= 0.5;
    }
    if (halvings > kMaxHalvings) {
      if (all_non_finite) {
        throw NumericalError("registration: loss stayed non-finite after 30 step halvings");
      }
      break;  // no descent possible at this resolution
    }

    const double relative_decrease = (current.loss - trial_loss) / current.loss;
    result.state = std::move(trial);
    current = flow_loss_gradient(result.state, baseline, observations, fcfg.integrator, kcfg);
    result.loss_history.push_back(current.loss);
    ++result.iterations;
    step_size *= kExpand;
    if (relative_decrease < fcfg.tolerance) break;
  }
  return result;
}

void check_fit_inputs(const ShapePoints& shape, const ControlPoints& c0) {
  if (c0.rows() < 1) throw std::invalid_argument("fit needs at least one control point");
  if (shape.rows() < 1) throw std::invalid_argument("fit needs at least one shape point");
  if (shape.cols() != c0.cols()) throw std::invalid_argument("shape and control point dimensions differ");
  if (!shape.allFinite() || !c0.allFinite()) throw std::invalid_argument("fit inputs are not finite");
}

}  // namespace

FitResult register_shapes(const ShapePoints& source, const ShapePoints& target, const ControlPoints& c0,
                          const FitConfig& fcfg, const KernelConfig& kcfg) {
  fcfg.validate();
  kcfg.validate();
  check_fit_inputs(source, c0);
  require_same_shape(source, target, "register");
  return fit(source, {{fcfg.integrator.steps, target}}, c0, fcfg, kcfg);
}

FitResult geodesic_regression(const ShapePoints& baseline, const std::vector<TimedShape>& observations,
                              const ControlPoints& c0, const FitConfig& fcfg, const KernelConfig& kcfg) {
  fcfg.validate();
  kcfg.validate();
  check_fit_inputs(baseline, c0);
  if (observations.size() < 2) throw std::invalid_argument("geodesic regression needs at least 2 observations");

  const auto [lo, hi] = std::minmax_element(observations.begin(), observations.end(),
                                            [](const TimedShape& a, const TimedShape& b) { return a.time < b.time; });
  const double t0 = lo->time;
  const double span = hi->time - t0;
  if (!(span > 0.0)) throw std::invalid_argument("geodesic regression needs distinct observation times");

  std::vector<NodeObservation> nodes;
  nodes.reserve(observations.size());
  for (const TimedShape& obs : observations) {
    require_same_shape(baseline, obs.shape, "geodesic_regression");
    nodes.push_back({nearest_node((obs.time - t0) / span, fcfg.integrator.steps), obs.shape});
  }
  return fit(baseline, nodes, c0, fcfg, kcfg);
}

std::vector<ShapePoints> exp_parallelize(const GeodesicPath& reference, const Momenta& omega0,
                                         const std::vector<double>& eval_times, const ShapePoints& shape,
                                         const TransportConfig& tcfg, const KernelConfig& kcfg) {
  TransportConfig along = tcfg;
  along.steps = reference.steps();
  along.main_order = reference.order;
  const TransportResult transported = parallel_transport(reference.initial(), omega0, along, kcfg);
  const std::vector<ShapePoints> reference_shapes = flow_shape(reference, shape);
  const IntegratorConfig icfg{reference.steps(), reference.order};

  std::vector<ShapePoints> predictions;
  predictions.reserve(eval_times.size());
  for (const double t : eval_times) {
    const int k = nearest_node(t, reference.steps());
    const TransportNode& node = transported.per_step[k];
    const GeodesicPath branch = shoot({node.state.c, node.omega}, icfg, kcfg);
    predictions.push_back(flow_shape(branch, reference_shapes[k]).back());
  }
  return predictions;
}

double reparametrize_time(double t_subject, const TimeReparam& rp, double t_ref_baseline) {
  rp.validate();
  return t_ref_baseline + rp.pace * (t_subject - rp.onset);
}

}  // namespace fanning
