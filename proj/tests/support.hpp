#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "fanning/hamiltonian.hpp"
#include "fanning/types.hpp"

namespace fanning::testing {

// Portable draws from a fixed engine: standard library distributions are not specified
// bit-for-bit across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Points uniform_points(int n, int d, double lo, double hi) {
    Points p(n, d);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) p(i, k) = uniform(lo, hi);
    return p;
  }

  Points normal_points(int n, int d, double scale) {
    Points p(n, d);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) p(i, k) = scale * normal();
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

inline Points points(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.begin()->size());
  Points p(n, d);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index k = 0;
    for (const double v : r) p(i, k++) = v;
    ++i;
  }
  return p;
}

/// Two control points, geodesic momenta pushing them apart vertically, and a transported
/// vector with components along both axes.
struct CanonicalInstance {
  GeodesicState s0{points({{0, 0}, {1, 0}}), points({{0, 0.5}, {0, -0.5}})};
  Momenta omega0 = points({{0.3, 0}, {0, 0.2}});
  KernelConfig kernel{1.0, 0.0};
};

inline double rel_diff(const Points& a, const Points& b) { return (a - b).norm() / b.norm(); }

}  // namespace fanning::testing
