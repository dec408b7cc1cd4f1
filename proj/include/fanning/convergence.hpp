#pragma once

#include <iosfwd>
#include <vector>

#include "fanning/hamiltonian.hpp"
#include "fanning/transport.hpp"

namespace fanning {

struct ConvergenceRecord {
  Variant variant = Variant::main;
  int steps = 1;
  double relative_error = 0.0;
  double wall_time_seconds = 0.0;
};

/// Transports omega0 for every (variant, N) pair and measures the relative K-norm error at
/// t = 1 against the main-variant run at the largest N of the grid. Grid points run
/// concurrently; the returned records are sorted by (variant name, N).
std::vector<ConvergenceRecord> convergence_study(const GeodesicState& s0, const Momenta& omega0,
                                                 const std::vector<int>& grid, const std::vector<Variant>& variants,
                                                 const KernelConfig& kcfg);

/// Least-squares slope of error against step length 1/N over the `last` largest N of one
/// variant, excluding the reference run itself (zero error).
double fitted_slope(const std::vector<ConvergenceRecord>& records, Variant variant, int last);

/// CSV with header `variant,N,relative_error,wall_time_seconds`.
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);

struct OracleRecord {
  int steps = 1;
  double relative_error = 0.0;
};

/// Fanning transport at each N compared with the Christoffel-symbol transport integrated
/// with `fine_steps` classical steps; errors are in the metric at the oracle endpoint.
std::vector<OracleRecord> oracle_study(const GeodesicState& s0, const Momenta& omega0, const std::vector<int>& grid,
                                       int fine_steps, Variant variant, const KernelConfig& kcfg);

/// CSV with header `N,relative_error`.
void write_oracle_csv(std::ostream& out, const std::vector<OracleRecord>& records);

}  // namespace fanning
