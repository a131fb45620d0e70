#pragma once

#include "lrcs/types.hpp"

namespace lrcs {

/// Data-parallel building blocks of the splitting solver. Each kernel has a
/// serial reference implementation under kernels::serial used by the tests and
/// the benchmark; the unprefixed versions use OpenMP and are the ones the
/// solver calls.
namespace kernels {

namespace serial {

/// Entrywise magnitude soft-threshold: each entry keeps its phase, its
/// magnitude shrinks by tau (to zero if |x| <= tau).
CMat entrywise_shrink(const CMat& X, double tau);

/// Column-group soft-threshold: column j scales by max(0, 1 - tau/||c_j||),
/// exactly zero when ||c_j|| <= tau. Zero columns stay zero.
CMat group_shrink(const CMat& C, double tau);

/// Squared Frobenius norm of (A - B) restricted to masked entries.
/// Unmasked entries are never read.
double masked_diff_sqnorm(const CMat& A, const CMat& B, const Mask& omega);

/// Radial projection of a residual onto the Frobenius ball of the given
/// radius, applied to masked entries only; unmasked entries pass through
/// unchanged (they are unconstrained).
CMat project_residual_ball(const CMat& R, const Mask& omega, double radius);

/// Consensus point for the ball constraint around M: on masked entries returns
/// M + s*(X - M) with s = min(1, radius/||X - M||_omega), elsewhere X.
/// M is only read on masked entries.
CMat ball_step(const CMat& X, const CMat& M, const Mask& omega, double radius);

/// Copy of M with unmasked entries replaced by zero. M is only read on masked
/// entries.
CMat masked_fill(const CMat& M, const Mask& omega);

/// Squared column norms.
RVec column_sqnorms(const CMat& C);

}  // namespace serial

CMat entrywise_shrink(const CMat& X, double tau);
CMat group_shrink(const CMat& C, double tau);
double masked_diff_sqnorm(const CMat& A, const CMat& B, const Mask& omega);
CMat project_residual_ball(const CMat& R, const Mask& omega, double radius);
CMat ball_step(const CMat& X, const CMat& M, const Mask& omega, double radius);
CMat masked_fill(const CMat& M, const Mask& omega);
RVec column_sqnorms(const CMat& C);

}  // namespace kernels
}  // namespace lrcs
