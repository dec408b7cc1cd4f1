#include "fanning/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fanning/kernel.hpp"

namespace fanning {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::main: return "main";
    case Variant::wec: return "wec";
    case Variant::rk4: return "rk4";
    case Variant::spg: return "spg";
  }
  return "main";
}

Variant parse_variant(std::string_view name) {
  if (name == "main") return Variant::main;
  if (name == "wec") return Variant::wec;
  if (name == "rk4") return Variant::rk4;
  if (name == "spg") return Variant::spg;
  throw std::invalid_argument("unknown transport variant '" + std::string(name) + "'");
}

void TransportConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("transport steps must be >= 1");
  if (main_order != 2 && main_order != 4) throw std::invalid_argument("main integrator order must be 2 or 4");
  if (!(collinear_tolerance >= 0.0)) throw std::invalid_argument("collinear tolerance must be >= 0");
}

TransportConfig TransportConfig::for_variant(Variant v, int steps) {
  TransportConfig cfg;
  cfg.steps = steps;
  switch (v) {
    case Variant::main: break;
    case Variant::wec: cfg.conserve = false; break;
    case Variant::rk4: cfg.main_order = 4; break;
    case Variant::spg: cfg.jacobi_mode = JacobiMode::single; break;
  }
  return cfg;
}

CorrectionResult conservation_correction(const Momenta& omega_tilde, const Momenta& alpha,
                                         const ControlPoints& c, double target_sq_norm,
                                         double target_pairing, const KernelConfig& kcfg,
                                         double collinear_tolerance) {
  require_same_shape(omega_tilde, alpha, "conservation_correction");
  require_same_shape(c, alpha, "conservation_correction");
  if (!(target_sq_norm >= 0.0)) throw std::invalid_argument("conservation target norm must be >= 0");

  const KernelMatrix k = kernel_matrix(c, kcfg);
  const double a = kernel_inner(k, alpha, alpha);
  if (a <= 1e-12) return {omega_tilde, 1.0, 0.0, true};

  const double b = kernel_inner(k, alpha, omega_tilde);
  const double q = kernel_inner(k, omega_tilde, omega_tilde);

  // Cauchy-Schwarz: |<alpha, omega>|^2 <= <alpha, alpha> <omega, omega>.
  const double boundary = target_pairing * target_pairing / a;
  const double slack = target_sq_norm - boundary;
  const double scale = std::max(target_sq_norm, boundary);
  if (slack < -collinear_tolerance * scale) {
    throw InfeasibleCorrectionError("conservation targets violate Cauchy-Schwarz for the current momenta");
  }
  if (slack <= collinear_tolerance * scale) {
    const double delta = target_pairing / a;
    return {delta * alpha, 0.0, delta, false};
  }

  const double perp = q - b * b / a;
  if (perp <= 1e-12 * q || q == 0.0) {
    throw InfeasibleCorrectionError("transported momenta are numerically collinear with the geodesic momenta");
  }
  const double beta = std::sqrt(slack / perp);
  const double delta = (target_pairing - beta * b) / a;
  return {beta * omega_tilde + delta * alpha, beta, delta, false};
}

Points jacobi_difference(const ControlPoints& c_plus, const ControlPoints& c_minus_or_main, double h,
                         JacobiMode mode) {
  require_same_shape(c_plus, c_minus_or_main, "jacobi_difference");
  if (!(h > 0.0)) throw std::invalid_argument("jacobi_difference: h must be positive");
  if (mode == JacobiMode::central) return (c_plus - c_minus_or_main) / (2.0 * h);
  return (c_plus - c_minus_or_main) / h;
}

FanningStepResult fanning_step(const GeodesicState& state, const Momenta& omega, double h,
                               const TransportConfig& tcfg, const KernelConfig& kcfg,
                               std::optional<ConservationTargets> targets) {
  require_same_shape(state.c, omega, "fanning_step");
  require_same_shape(state.c, state.alpha, "fanning_step");
  if (!(h > 0.0)) throw std::invalid_argument("fanning_step: h must be positive");

  FanningStepResult out;
  out.next = step(state, h, tcfg.main_order, kcfg);
  if ((omega.array() == 0.0).all()) {
    out.omega = Momenta::Zero(omega.rows(), omega.cols());
    return out;
  }

  const GeodesicState plus = step({state.c, state.alpha + h * omega}, h, 2, kcfg);
  Points jacobi;
  if (tcfg.jacobi_mode == JacobiMode::central) {
    const GeodesicState minus = step({state.c, state.alpha - h * omega}, h, 2, kcfg);
    jacobi = jacobi_difference(plus.c, minus.c, h, JacobiMode::central);
  } else {
    jacobi = jacobi_difference(plus.c, out.next.c, h, JacobiMode::single);
  }

  Momenta omega_tilde = solve_kernel(out.next.c, jacobi / h, kcfg);
  if (!tcfg.conserve) {
    out.omega = std::move(omega_tilde);
    return out;
  }

  if (!targets) {
    const KernelMatrix k = kernel_matrix(state.c, kcfg);
    targets = ConservationTargets{kernel_inner(k, omega, omega), kernel_inner(k, state.alpha, omega)};
  }
  CorrectionResult corrected = conservation_correction(omega_tilde, out.next.alpha, out.next.c, targets->sq_norm,
                                                       targets->pairing, kcfg, tcfg.collinear_tolerance);
  out.omega = std::move(corrected.omega);
  out.correction_skipped = corrected.skipped;
  return out;
}

namespace {

TransportDiagnostic diagnose(const GeodesicState& s, const Momenta& omega, const KernelConfig& kcfg) {
  const KernelMatrix k = kernel_matrix(s.c, kcfg);
  return {kernel_inner(k, omega, omega), kernel_inner(k, s.alpha, omega)};
}

}  // namespace

TransportResult parallel_transport(const GeodesicState& s0, const Momenta& omega0,
                                   const TransportConfig& tcfg, const KernelConfig& kcfg) {
  s0.validate();
  tcfg.validate();
  kcfg.validate();
  require_same_shape(s0.c, omega0, "parallel_transport");
  if (!omega0.allFinite()) throw std::invalid_argument("parallel_transport: omega0 is not finite");

  TransportResult result;
  result.per_step.reserve(tcfg.steps + 1);
  result.diagnostics.reserve(tcfg.steps + 1);
  result.per_step.push_back({s0, omega0});
  result.diagnostics.push_back(diagnose(s0, omega0, kcfg));

  // True parallel transport preserves both quantities exactly, so the targets stay fixed.
  const ConservationTargets targets{result.diagnostics.front().sq_norm, result.diagnostics.front().pairing};
  const double h = 1.0 / tcfg.steps;

  for (int k = 0; k < tcfg.steps; ++k) {
    const TransportNode& node = result.per_step.back();
    FanningStepResult next;
    try {
      next = fanning_step(node.state, node.omega, h, tcfg, kcfg, targets);
    } catch (const BlowUpError& e) {
      throw BlowUpError("parallel transport diverged", k);
    } catch (const IllConditionedError& e) {
      throw IllConditionedError(std::string(e.what()) + " (transport step " + std::to_string(k) + ")");
    } catch (const InfeasibleCorrectionError& e) {
      throw InfeasibleCorrectionError(std::string(e.what()) + " (transport step " + std::to_string(k) + ")");
    }
    if (next.correction_skipped) ++result.skipped_corrections;
    result.diagnostics.push_back(diagnose(next.next, next.omega, kcfg));
    result.per_step.push_back({std::move(next.next), std::move(next.omega)});
  }
  result.omega_final = result.per_step.back().omega;
  return result;
}

}  // namespace fanning
