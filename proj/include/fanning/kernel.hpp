#pragma once

#include "fanning/types.hpp"

namespace fanning {

/// Scalar n x n Gram matrix. The operator on stacked nd-vectors is K (x) I_d and is
/// never materialized; every routine below applies K per coordinate.
using KernelMatrix = Eigen::MatrixXd;

double kernel_value(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                    const Eigen::Ref<const Eigen::RowVectorXd>& y, const KernelConfig& cfg);

// The routines below are OpenMP-parallel over output rows. Each row is computed by the
// same serial loop regardless of the thread count, so results are bitwise independent of
// the parallelism degree. Serial reference versions live in fanning::serial.

KernelMatrix kernel_matrix(const ControlPoints& c, const KernelConfig& cfg);

/// Velocity field v(x) = sum_i k(x, c_i) alpha_i evaluated at every row of `query`.
Points apply_kernel(const ControlPoints& c, const Momenta& alpha, const Points& query,
                    const KernelConfig& cfg);

/// Gradient of alpha^T K_c alpha with respect to each control point.
Points energy_gradient(const ControlPoints& c, const Momenta& alpha, const KernelConfig& cfg);

/// Solves (K_c + ridge I) omega = v coordinate-wise with a Cholesky factorization.
/// Throws IllConditionedError if the factorization fails or the relative residual
/// |(K + ridge I) omega - v| / |v| exceeds 1e-6 (near-coincident control points).
Momenta solve_kernel(const ControlPoints& c, const Points& v, const KernelConfig& cfg, double ridge);
Momenta solve_kernel(const ControlPoints& c, const Points& v, const KernelConfig& cfg);

/// <u, v>_c = u^T (K_c (x) I_d) v.
double kernel_inner(const KernelMatrix& k, const Momenta& u, const Momenta& v);
double kernel_inner(const ControlPoints& c, const Momenta& u, const Momenta& v, const KernelConfig& cfg);

/// |a - b|_K / |b|_K, with K assembled at `c`.
double relative_kernel_error(const ControlPoints& c, const Momenta& a, const Momenta& b,
                             const KernelConfig& cfg);

namespace serial {

// Straightforward single-threaded loops, kept as the reference the parallel kernels are
// tested and benchmarked against.
KernelMatrix kernel_matrix(const ControlPoints& c, const KernelConfig& cfg);
Points apply_kernel(const ControlPoints& c, const Momenta& alpha, const Points& query,
                    const KernelConfig& cfg);
Points energy_gradient(const ControlPoints& c, const Momenta& alpha, const KernelConfig& cfg);

}  // namespace serial

}  // namespace fanning
