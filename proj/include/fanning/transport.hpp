#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "fanning/hamiltonian.hpp"
#include "fanning/types.hpp"

namespace fanning {

/// How the Jacobi field is estimated from the fan of perturbed geodesics.
enum class JacobiMode {
  central,  ///< (c+ - c-) / 2h from geodesics shot with alpha +/- h omega
  single,   ///< (c+ - c_main) / h from one perturbed geodesic
};

/// Named scheme variants used in convergence studies.
enum class Variant {
  main,  ///< midpoint main geodesic, central differences, conservation enforced
  wec,   ///< without enforcing conservation
  rk4,   ///< classical fourth-order main geodesic
  spg,   ///< single perturbed geodesic
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct TransportConfig {
  int steps = 10;
  /// Integrator order of the main geodesic. Perturbed geodesics always use order 2.
  int main_order = 2;
  /// Restore the initial omega^T K omega and alpha^T K omega after every step.
  bool conserve = true;
  JacobiMode jacobi_mode = JacobiMode::central;
  /// Relative Cauchy-Schwarz slack below which the conservation targets are treated as
  /// describing a vector collinear with the geodesic momenta.
  double collinear_tolerance = 1e-6;

  void validate() const;
  static TransportConfig for_variant(Variant v, int steps);
};

/// Values of the metric norm and of the pairing with the geodesic momenta to preserve.
struct ConservationTargets {
  double sq_norm = 0.0;
  double pairing = 0.0;
};

struct CorrectionResult {
  Momenta omega;
  double beta = 1.0;
  double delta = 0.0;
  /// True when the geodesic has (numerically) zero velocity and the input was returned as is.
  bool skipped = false;
};

/// Returns beta * omega_tilde + delta * alpha matching both targets in the metric at `c`.
/// The positive beta root is chosen.
CorrectionResult conservation_correction(const Momenta& omega_tilde, const Momenta& alpha,
                                         const ControlPoints& c, double target_sq_norm,
                                         double target_pairing, const KernelConfig& kcfg,
                                         double collinear_tolerance = 1e-6);

/// Finite-difference Jacobi field from perturbed endpoint control points.
Points jacobi_difference(const ControlPoints& c_plus, const ControlPoints& c_minus_or_main, double h,
                         JacobiMode mode);

struct FanningStepResult {
  GeodesicState next;
  Momenta omega;
  bool correction_skipped = false;
};

/// One step of the fanning scheme from node k to node k + 1. Without explicit targets the
/// conservation step preserves the values measured at node k.
FanningStepResult fanning_step(const GeodesicState& state, const Momenta& omega, double h,
                               const TransportConfig& tcfg, const KernelConfig& kcfg,
                               std::optional<ConservationTargets> targets = std::nullopt);

struct TransportNode {
  GeodesicState state;
  Momenta omega;
};

struct TransportDiagnostic {
  double sq_norm = 0.0;  ///< omega^T K omega
  double pairing = 0.0;  ///< alpha^T K omega
};

struct TransportResult {
  Momenta omega_final;
  std::vector<TransportNode> per_step;           ///< N + 1 nodes
  std::vector<TransportDiagnostic> diagnostics;  ///< N + 1 entries
  int skipped_corrections = 0;
};

/// Transports omega0 from the start to the end of the geodesic shot from s0.
TransportResult parallel_transport(const GeodesicState& s0, const Momenta& omega0,
                                   const TransportConfig& tcfg, const KernelConfig& kcfg);

}  // namespace fanning
