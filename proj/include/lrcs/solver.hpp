#pragma once

#include <optional>
#include <vector>

#include "lrcs/kernels.hpp"
#include "lrcs/types.hpp"

namespace lrcs {

enum class SolveMode { Basic, Combined };

struct SolverKnobs {
  double rho = 1.0;         // augmented penalty
  double alpha = 1.6;       // over-relaxation
  int max_iters = 5000;
  double tol_abs = 1e-7;
  double tol_rel = 1e-5;
  bool adaptive_rho = true;  // rescale rho when primal/dual residuals diverge
};

/// One decomposition problem. M is read only on masked entries. W is the
/// coefficient matrix the column-sparse part multiplies (any column scale;
/// scenarios pass their solver-coordinate W). lambda weighs the column-group
/// penalty in basic mode, lambda1/lambda2 weigh the group/entrywise penalties
/// in combined mode. The residual budget on observed entries is
/// sqrt(|omega|/(t*p)) * eta.
struct ProblemSpec {
  CMat M;
  Mask omega;
  double eta = 0.0;
  CMat W;
  double lambda = 0.95;
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  SolveMode mode = SolveMode::Basic;
  SolverKnobs knobs;

  /// Optional structural restrictions used by analysis code: confine L's
  /// column space to span(col_space), confine C's support to support_only.
  std::optional<CMat> col_space;
  std::optional<std::vector<int>> support_only;
};

struct DecompositionResult {
  CMat L_star;
  CMat C_star;
  CMat S_star;
  int iterations = 0;
  bool converged = false;
  double constraint_violation = 0.0;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  std::vector<double> objective;
};

/// Singular value soft-threshold: prox of tau * nuclear norm at X.
CMat svt(const CMat& X, double tau);

/// Thin SVD with the backend picked by size; throws SvdFailure if the
/// decomposition does not converge.
struct ThinSvd {
  CMat U;
  RVec s;
  CMat V;
};
ThinSvd thin_svd(const CMat& X);

/// Minimize ||L||_* + lambda*||C||_{1,2} (+ lambda2*||S||_1 in combined mode)
/// subject to the masked residual ball ||M - L - C*W^T - S||_omega <=
/// sqrt(|omega|/(t*p)) * eta, by over-relaxed consensus splitting with an
/// exact singular value prox for L, a Lipschitz-majorized group prox for C,
/// and an exact entrywise prox for S.
DecompositionResult solve(const ProblemSpec& spec);

using kernels::entrywise_shrink;
using kernels::group_shrink;
using kernels::project_residual_ball;

}  // namespace lrcs
