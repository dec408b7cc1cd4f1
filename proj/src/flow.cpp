#include "fanning/flow.hpp"

#include <array>
#include <cmath>

#include "fanning/kernel.hpp"

namespace fanning {

namespace {

struct Tableau {
  int stages;
  std::array<std::array<double, 4>, 4> a;
  std::array<double, 4> b;
};

constexpr Tableau kMidpoint{2, {{{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}}, {0, 1, 0, 0}};
constexpr Tableau kClassicRk4{4,
                              {{{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}}},
                              {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0}};

const Tableau& tableau_for(int order) {
  if (order == 2) return kMidpoint;
  if (order == 4) return kClassicRk4;
  throw std::invalid_argument("integrator order must be 2 or 4, got " + std::to_string(order));
}

void axpy(FlowState& z, double a, const FlowState& x) {
  z.c += a * x.c;
  z.alpha += a * x.alpha;
  if (z.y.rows() > 0) z.y += a * x.y;
}

FlowState zeros_like(const FlowState& z) {
  return {ControlPoints::Zero(z.c.rows(), z.c.cols()), Momenta::Zero(z.alpha.rows(), z.alpha.cols()),
          ShapePoints::Zero(z.y.rows(), z.y.cols())};
}

// Stage inputs Z_s and slopes K_s of one explicit step.
void stages(const FlowState& z, double h, const Tableau& t, const KernelConfig& cfg,
            std::array<FlowState, 4>& inputs, std::array<FlowState, 4>& slopes) {
  for (int s = 0; s < t.stages; ++s) {
    inputs[s] = z;
    for (int r = 0; r < s; ++r) {
      if (t.a[s][r] != 0.0) axpy(inputs[s], h * t.a[s][r], slopes[r]);
    }
    slopes[s] = flow_rhs(inputs[s], cfg);
  }
}

}  // namespace

FlowState flow_rhs(const FlowState& z, const KernelConfig& cfg) {
  FlowState dz;
  dz.c = apply_kernel(z.c, z.alpha, z.c, cfg);
  dz.alpha = -0.5 * energy_gradient(z.c, z.alpha, cfg);
  dz.y = z.y.rows() > 0 ? apply_kernel(z.c, z.alpha, z.y, cfg) : ShapePoints(0, z.c.cols());
  return dz;
}

FlowState flow_step(const FlowState& z, double h, int order, const KernelConfig& cfg) {
  const Tableau& t = tableau_for(order);
  std::array<FlowState, 4> inputs;
  std::array<FlowState, 4> slopes;
  stages(z, h, t, cfg, inputs, slopes);

  FlowState increment = zeros_like(z);
  for (int s = 0; s < t.stages; ++s) {
    if (t.b[s] != 0.0) axpy(increment, t.b[s], slopes[s]);
  }
  FlowState next = z;
  axpy(next, h, increment);
  return next;
}

FlowState flow_rhs_vjp(const FlowState& z, const FlowState& lambda, const KernelConfig& cfg) {
  const Eigen::Index n = z.c.rows();
  const Eigen::Index d = z.c.cols();
  const Eigen::Index m = z.y.rows();
  const double inv_var = 1.0 / (cfg.sigma * cfg.sigma);
  const double inv_two_var = 0.5 * inv_var;

  const double* c = z.c.data();
  const double* al = z.alpha.data();
  const double* y = z.y.data();
  const double* lc = lambda.c.data();
  const double* la = lambda.alpha.data();
  const double* ly = lambda.y.data();

  auto sqdist = [d](const double* u, const double* v) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) s += (u[k] - v[k]) * (u[k] - v[k]);
    return s;
  };
  auto dot = [d](const double* u, const double* v) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) s += u[k] * v[k];
    return s;
  };

  FlowState out = zeros_like(z);

  // Control-point rows.
#pragma omp parallel for schedule(static)
  for (Eigen::Index p = 0; p < n; ++p) {
    const double* cp = c + p * d;
    const double* ap = al + p * d;
    const double* lcp = lc + p * d;
    const double* lap = la + p * d;
    double* gc = out.c.data() + p * d;
    double* ga = out.alpha.data() + p * d;

    for (Eigen::Index j = 0; j < n; ++j) {
      const double* cj = c + j * d;
      const double* aj = al + j * d;
      const double* lcj = lc + j * d;
      const double* laj = la + j * d;
      const double kpj = std::exp(-sqdist(cp, cj) * inv_two_var);

      // d/d alpha_p of lambda_c . (K alpha).
      for (Eigen::Index k = 0; k < d; ++k) ga[k] += kpj * lcj[k];
      if (j == p) continue;

      // (lambda_alpha_p - lambda_alpha_j) . (c_p - c_j) / sigma^2
      double w_sum = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) w_sum += (lap[k] - laj[k]) * (cp[k] - cj[k]);
      w_sum *= inv_var;
      const double s_pj = dot(ap, aj);

      // d/d alpha_p of lambda_alpha . alpha'.
      for (Eigen::Index k = 0; k < d; ++k) ga[k] += kpj * w_sum * aj[k];

      const double pair = dot(lcp, aj) + dot(lcj, ap) + s_pj * w_sum;
      for (Eigen::Index k = 0; k < d; ++k) {
        gc[k] += kpj * inv_var * (-(cp[k] - cj[k]) * pair + s_pj * (lap[k] - laj[k]));
      }
    }

    // Passive points see control point p through k(y_q, c_p) alpha_p.
    for (Eigen::Index q = 0; q < m; ++q) {
      const double* yq = y + q * d;
      const double* lyq = ly + q * d;
      const double kqp = std::exp(-sqdist(yq, cp) * inv_two_var);
      const double proj = dot(lyq, ap);
      for (Eigen::Index k = 0; k < d; ++k) {
        ga[k] += kqp * lyq[k];
        gc[k] += kqp * inv_var * (yq[k] - cp[k]) * proj;
      }
    }
  }

  // Passive point rows.
#pragma omp parallel for schedule(static)
  for (Eigen::Index q = 0; q < m; ++q) {
    const double* yq = y + q * d;
    const double* lyq = ly + q * d;
    double* gy = out.y.data() + q * d;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double* cj = c + j * d;
      const double kqj = std::exp(-sqdist(yq, cj) * inv_two_var);
      const double proj = dot(lyq, al + j * d);
      for (Eigen::Index k = 0; k < d; ++k) gy[k] -= kqj * inv_var * (yq[k] - cj[k]) * proj;
    }
  }
  return out;
}

FlowState flow_step_vjp(const FlowState& z, double h, int order, const FlowState& lambda_next,
                        const KernelConfig& cfg) {
  const Tableau& t = tableau_for(order);
  std::array<FlowState, 4> inputs;
  std::array<FlowState, 4> slopes;
  stages(z, h, t, cfg, inputs, slopes);

  std::array<FlowState, 4> slope_adj;
  for (int s = 0; s < t.stages; ++s) {
    slope_adj[s] = zeros_like(z);
    if (t.b[s] != 0.0) axpy(slope_adj[s], h * t.b[s], lambda_next);
  }

  FlowState lambda = lambda_next;
  for (int s = t.stages - 1; s >= 0; --s) {
    const FlowState input_adj = flow_rhs_vjp(inputs[s], slope_adj[s], cfg);
    axpy(lambda, 1.0, input_adj);
    for (int r = 0; r < s; ++r) {
      if (t.a[s][r] != 0.0) axpy(slope_adj[r], h * t.a[s][r], input_adj);
    }
  }
  return lambda;
}

}  // namespace fanning
