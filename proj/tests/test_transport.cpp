#include <doctest.h>

#include <cmath>

#include "fanning/kernel.hpp"
#include "fanning/transport.hpp"
#include "support.hpp"

using namespace fanning;
using fanning::testing::points;

namespace {

GeodesicState random_state(testing::Rng& rng, int n) {
  return {rng.uniform_points(n, 2, 0.0, 2.0), rng.normal_points(n, 2, 0.5)};
}

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("variants and names") {
    for (const Variant v : {Variant::main, Variant::wec, Variant::rk4, Variant::spg}) {
      CHECK(parse_variant(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_variant("rk3"), std::invalid_argument);

    const auto main = TransportConfig::for_variant(Variant::main, 12);
    CHECK(main.steps == 12);
    CHECK(main.conserve);
    CHECK(main.main_order == 2);
    CHECK(main.jacobi_mode == JacobiMode::central);
    CHECK_FALSE(TransportConfig::for_variant(Variant::wec, 5).conserve);
    CHECK(TransportConfig::for_variant(Variant::rk4, 5).main_order == 4);
    CHECK(TransportConfig::for_variant(Variant::spg, 5).jacobi_mode == JacobiMode::single);
    CHECK_THROWS_AS(TransportConfig::for_variant(Variant::main, 0).validate(), std::invalid_argument);
  }

  TEST_CASE("jacobi_difference examples") {
    const Points c = points({{0.25, 0.5}, {1.0, -0.375}});
    CHECK(jacobi_difference(c, c, 0.05, JacobiMode::central).isZero(0.0));
    const Points u = points({{1, -2}, {0.5, 3}});
    const double h = 0.125;
    CHECK(jacobi_difference(c + 2 * h * u, c, h, JacobiMode::central) == u);
    CHECK(jacobi_difference(c + h * u, c, h, JacobiMode::single) == u);
  }

  TEST_CASE("conservation_correction examples") {
    testing::Rng rng(31);
    const KernelConfig cfg;
    const GeodesicState s = random_state(rng, 3);
    const Momenta w = rng.normal_points(3, 2, 0.5);
    const KernelMatrix k = kernel_matrix(s.c, cfg);

    const auto identity = conservation_correction(w, s.alpha, s.c, kernel_inner(k, w, w), kernel_inner(k, s.alpha, w), cfg);
    CHECK(identity.beta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(identity.delta) <= 1e-12);
    CHECK(testing::rel_diff(identity.omega, w) <= 1e-12);

    const double aa = kernel_inner(k, s.alpha, s.alpha);
    const auto collinear = conservation_correction(s.alpha, s.alpha, s.c, aa, aa, cfg);
    CHECK(testing::rel_diff(collinear.omega, s.alpha) <= 1e-14);

    const double tn = 0.7;
    const double tp = 0.1;
    const auto fixed = conservation_correction(w, s.alpha, s.c, tn, tp, cfg);
    CHECK(std::abs(kernel_inner(k, fixed.omega, fixed.omega) - tn) <= 1e-10);
    CHECK(std::abs(kernel_inner(k, s.alpha, fixed.omega) - tp) <= 1e-10);
    CHECK(fixed.beta > 0.0);
  }

  TEST_CASE("conservation_correction failure modes") {
    const KernelConfig cfg;
    const Points c = points({{0, 0}, {1, 0}});
    const Points alpha = points({{0, 0.5}, {0, -0.5}});
    const Points w = points({{0.3, 0}, {0, 0.2}});
    const double aa = kernel_inner(c, alpha, alpha, cfg);

    CHECK_THROWS_AS(conservation_correction(w, alpha, c, 0.1 * aa, aa, cfg), InfeasibleCorrectionError);
    CHECK_THROWS_AS(conservation_correction(alpha, alpha, c, 2.0 * aa, aa, cfg), InfeasibleCorrectionError);

    const auto skipped = conservation_correction(w, Points::Zero(2, 2), c, 1.0, 0.0, cfg);
    CHECK(skipped.skipped);
    CHECK(skipped.omega == w);
  }

  TEST_CASE("fanning_step examples") {
    const KernelConfig cfg;
    const TransportConfig tcfg = TransportConfig::for_variant(Variant::main, 100);

    testing::Rng rng(42);
    const GeodesicState s = random_state(rng, 3);
    const auto self = fanning_step(s, s.alpha, 0.01, tcfg, cfg);
    CHECK(relative_kernel_error(self.next.c, self.omega, self.next.alpha, cfg) <= 1e-8);

    const GeodesicState flat{points({{0.3, 0.1}}), points({{1.0, -0.5}})};
    const Momenta w1 = points({{0.2, 0.7}});
    for (const Variant v : {Variant::main, Variant::wec, Variant::rk4, Variant::spg}) {
      const auto r = fanning_step(flat, w1, 0.1, TransportConfig::for_variant(v, 10), cfg);
      CHECK(testing::rel_diff(r.omega, w1) <= 1e-12);
    }

    const auto zero = fanning_step(s, Points::Zero(3, 2), 0.01, tcfg, cfg);
    CHECK(zero.omega.isZero(0.0));
  }

  TEST_CASE("parallel_transport examples") {
    const KernelConfig cfg;
    testing::Rng rng(42);
    const GeodesicState s = random_state(rng, 3);
    const TransportResult self = parallel_transport(s, s.alpha, TransportConfig::for_variant(Variant::main, 100), cfg);
    const GeodesicState& end = self.per_step.back().state;
    CHECK(self.per_step.size() == 101);
    CHECK(self.diagnostics.size() == 101);
    CHECK(relative_kernel_error(end.c, self.omega_final, end.alpha, cfg) <= 1e-6);

    const GeodesicState flat{points({{0, 0}}), points({{0.4, 0.9}})};
    const Momenta w = points({{-1.0, 2.0}});
    const TransportResult r = parallel_transport(flat, w, TransportConfig::for_variant(Variant::main, 10), cfg);
    CHECK(testing::rel_diff(r.omega_final, w) <= 1e-12);

    const TransportResult z = parallel_transport(s, Points::Zero(3, 2), TransportConfig::for_variant(Variant::main, 10), cfg);
    for (const auto& node : z.per_step) CHECK(node.omega.isZero(0.0));
  }

  TEST_CASE("conservation holds at every node") {
    const testing::CanonicalInstance inst;
    for (const int n : {10, 100, 400}) {
      const TransportResult r = parallel_transport(inst.s0, inst.omega0, TransportConfig::for_variant(Variant::main, n), inst.kernel);
      const auto& d0 = r.diagnostics.front();
      for (const auto& d : r.diagnostics) {
        CHECK(std::abs(d.sq_norm - d0.sq_norm) <= 1e-9 * d0.sq_norm);
        CHECK(std::abs(d.pairing - d0.pairing) <= 1e-9 * std::abs(d0.pairing));
      }
    }
  }

  TEST_CASE("the conservation-free variant is homogeneous in omega") {
    const testing::CanonicalInstance inst;
    const auto tcfg = TransportConfig::for_variant(Variant::wec, 50);
    const Momenta base = parallel_transport(inst.s0, inst.omega0, tcfg, inst.kernel).omega_final;
    for (const double lambda : {-1.0, 2.0}) {
      const Momenta scaled = parallel_transport(inst.s0, lambda * inst.omega0, tcfg, inst.kernel).omega_final;
      CHECK(testing::rel_diff(scaled, lambda * base) <= 1e-6);
    }
  }

  TEST_CASE("norm error without conservation shrinks linearly") {
    const testing::CanonicalInstance inst;
    const double n0 = kernel_inner(inst.s0.c, inst.omega0, inst.omega0, inst.kernel);
    const auto norm_error = [&](int n) {
      const auto r = parallel_transport(inst.s0, inst.omega0, TransportConfig::for_variant(Variant::wec, n), inst.kernel);
      return std::abs(r.diagnostics.back().sq_norm - n0) / n0;
    };
    const double ratio = norm_error(50) / norm_error(100);
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }

  TEST_CASE("transport errors carry the failing step") {
    const KernelConfig cfg;
    const GeodesicState s{points({{0, 0}, {0, 0}}), points({{0, 0.5}, {0, -0.5}})};
    CHECK_THROWS_AS(parallel_transport(s, points({{1, 0}, {0, 1}}), TransportConfig::for_variant(Variant::main, 5), cfg),
                    IllConditionedError);
  }
}
