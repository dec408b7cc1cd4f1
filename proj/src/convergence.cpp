#include "fanning/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <ostream>
#include <string>

#include "fanning/kernel.hpp"
#include "fanning/oracle.hpp"
#include "fanning/point_io.hpp"

namespace fanning {

namespace {

void check_grid(const std::vector<int>& grid) {
  if (grid.empty()) throw std::invalid_argument("convergence grid is empty");
  for (const int n : grid) {
    if (n < 1) throw std::invalid_argument("convergence grid entries must be >= 1");
  }
}

// Runs `body(i)` for i in [0, count) across threads and rethrows the first failure.
template <typename Body>
void parallel_tasks(int count, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<ConvergenceRecord> convergence_study(const GeodesicState& s0, const Momenta& omega0,
                                                 const std::vector<int>& grid, const std::vector<Variant>& variants,
                                                 const KernelConfig& kcfg) {
  check_grid(grid);
  if (variants.empty()) throw std::invalid_argument("no variants requested");
  const int n_ref = *std::max_element(grid.begin(), grid.end());
  const TransportResult reference = parallel_transport(s0, omega0, TransportConfig::for_variant(Variant::main, n_ref), kcfg);
  const ControlPoints& c_ref = reference.per_step.back().state.c;

  std::vector<ConvergenceRecord> records;
  for (const Variant v : variants) {
    for (const int n : grid) records.push_back({v, n, 0.0, 0.0});
  }

  parallel_tasks(static_cast<int>(records.size()), [&](int i) {
    ConvergenceRecord& rec = records[i];
    const auto start = std::chrono::steady_clock::now();
    const TransportResult run = parallel_transport(s0, omega0, TransportConfig::for_variant(rec.variant, rec.steps), kcfg);
    rec.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.relative_error = relative_kernel_error(c_ref, run.omega_final, reference.omega_final, kcfg);
  });

  std::sort(records.begin(), records.end(), [](const ConvergenceRecord& a, const ConvergenceRecord& b) {
    const auto va = to_string(a.variant);
    const auto vb = to_string(b.variant);
    return va != vb ? va < vb : a.steps < b.steps;
  });
  return records;
}

double fitted_slope(const std::vector<ConvergenceRecord>& records, Variant variant, int last) {
  std::vector<const ConvergenceRecord*> rows;
  int n_max = 0;
  for (const auto& r : records) n_max = std::max(n_max, r.steps);
  for (const auto& r : records) {
    if (r.variant == variant && r.steps != n_max) rows.push_back(&r);
  }
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->steps < b->steps; });
  if (static_cast<int>(rows.size()) > last) rows.erase(rows.begin(), rows.end() - last);
  if (rows.size() < 2) throw std::invalid_argument("fitted_slope needs at least two records");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto* r : rows) {
    const double x = 1.0 / r->steps;
    sx += x;
    sy += r->relative_error;
    sxx += x * x;
    sxy += x * r->relative_error;
  }
  const double m = static_cast<double>(rows.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  out << "variant,N,relative_error,wall_time_seconds\n";
  char wall[32];
  for (const auto& r : records) {
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_time_seconds);
    out << to_string(r.variant) << ',' << r.steps << ',' << io::format_double(r.relative_error) << ',' << wall << '\n';
  }
}

std::vector<OracleRecord> oracle_study(const GeodesicState& s0, const Momenta& omega0, const std::vector<int>& grid,
                                       int fine_steps, Variant variant, const KernelConfig& kcfg) {
  check_grid(grid);
  const oracle::TangentVector w0 = oracle::momenta_to_tangent(s0.c, omega0, kcfg);
  const oracle::TransportOdeResult truth = oracle::transport_ode(s0, w0, fine_steps, kcfg);

  std::vector<OracleRecord> records;
  for (const int n : grid) records.push_back({n, 0.0});
  parallel_tasks(static_cast<int>(records.size()), [&](int i) {
    const TransportResult run = parallel_transport(s0, omega0, TransportConfig::for_variant(variant, records[i].steps), kcfg);
    const GeodesicState& end = run.per_step.back().state;
    const oracle::TangentVector w = oracle::momenta_to_tangent(end.c, run.omega_final, kcfg);
    records[i].relative_error = oracle::relative_metric_error(truth.final_state.c, w, truth.tangent, kcfg);
  });
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.steps < b.steps; });
  return records;
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleRecord>& records) {
  out << "N,relative_error\n";
  for (const auto& r : records) out << r.steps << ',' << io::format_double(r.relative_error) << '\n';
}

}  // namespace fanning
