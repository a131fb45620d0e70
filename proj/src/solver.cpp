#include "lrcs/solver.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "lrcs/errors.hpp"

namespace lrcs {

namespace {

constexpr int kBdcCrossover = 16;

// Orthonormal basis of the column space of B.
CMat orthonormalize(const CMat& B) {
  Eigen::HouseholderQR<CMat> qr(B);
  CMat Q = qr.householderQ() * CMat::Identity(B.rows(), B.cols());
  return Q;
}

struct ShrunkSvd {
  CMat L;
  double nuclear = 0.0;  // nuclear norm of L
};

// Singular value soft-threshold of X, also returning the resulting nuclear norm.
ShrunkSvd svt_with_value(const CMat& X, double tau) {
  ShrunkSvd out;
  if (tau == 0.0) {
    out.L = X;
    ThinSvd svd = thin_svd(X);
    out.nuclear = svd.s.sum();
    return out;
  }
  ThinSvd svd = thin_svd(X);
  Eigen::Index keep = 0;
  while (keep < svd.s.size() && svd.s(keep) > tau) ++keep;
  if (keep == 0) {
    out.L = CMat::Zero(X.rows(), X.cols());
    return out;
  }
  RVec shrunk = svd.s.head(keep).array() - tau;
  out.L = svd.U.leftCols(keep) * shrunk.asDiagonal() * svd.V.leftCols(keep).adjoint();
  out.nuclear = shrunk.sum();
  return out;
}

}  // namespace

ThinSvd thin_svd(const CMat& X) {
  ThinSvd out;
  if (std::min(X.rows(), X.cols()) < kBdcCrossover) {
    Eigen::JacobiSVD<CMat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw SvdFailure("SVD did not converge");
    out.U = svd.matrixU();
    out.s = svd.singularValues();
    out.V = svd.matrixV();
  } else {
    Eigen::BDCSVD<CMat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw SvdFailure("SVD did not converge");
    out.U = svd.matrixU();
    out.s = svd.singularValues();
    out.V = svd.matrixV();
  }
  return out;
}

CMat svt(const CMat& X, double tau) {
  if (tau < 0.0) throw InvalidSize("svt threshold must be nonnegative");
  if (tau == 0.0) return X;
  return svt_with_value(X, tau).L;
}

DecompositionResult solve(const ProblemSpec& spec) {
  const Eigen::Index t = spec.M.rows();
  const Eigen::Index p = spec.M.cols();
  const Eigen::Index n = spec.W.cols();
  if (t <= 0 || p <= 0) throw InvalidSize("measurement matrix is empty");
  if (spec.W.rows() != p) throw ShapeMismatch("W must have one row per measurement channel");
  if (spec.omega.rows() != t || spec.omega.cols() != p) throw ShapeMismatch("mask shape must match M");
  if (spec.eta < 0.0) throw InvalidSize("eta must be nonnegative");
  if (!(spec.knobs.rho > 0.0)) throw InvalidSize("rho must be positive");
  if (spec.knobs.max_iters < 1) throw InvalidSize("max_iters must be at least 1");

  const Eigen::Index observed = mask_count(spec.omega);
  if (observed == 0) throw EmptyMask("no observed entries");
  const double radius =
      std::sqrt(static_cast<double>(observed) / static_cast<double>(t * p)) * spec.eta;

  const bool combined = spec.mode == SolveMode::Combined;
  const double lam_c = combined ? spec.lambda1 : spec.lambda;
  const double lam_s = spec.lambda2;

  const CMat Wconj = spec.W.conjugate();
  const CMat Wt = spec.W.transpose();
  double Lw2 = 0.0;
  {
    ThinSvd wsvd = thin_svd(spec.W);
    Lw2 = wsvd.s.size() > 0 ? wsvd.s(0) * wsvd.s(0) : 0.0;
  }
  if (Lw2 <= 0.0) throw InvalidSize("W must be nonzero");

  std::optional<CMat> basis;
  if (spec.col_space) {
    if (spec.col_space->rows() != t) throw ShapeMismatch("col_space must have one row per instant");
    basis = orthonormalize(*spec.col_space);
  }
  std::vector<bool> allowed;
  if (spec.support_only) {
    allowed.assign(static_cast<std::size_t>(n), false);
    for (int j : *spec.support_only) {
      if (j < 0 || j >= n) throw InvalidSize("support restriction index out of range");
      allowed[static_cast<std::size_t>(j)] = true;
    }
  }

  double rho = spec.knobs.rho;
  const double alpha = spec.knobs.alpha;
  const double sqrt_tp = std::sqrt(static_cast<double>(t * p));

  CMat L = CMat::Zero(t, p);
  CMat C = CMat::Zero(t, n);
  CMat S = CMat::Zero(t, p);
  CMat Z = kernels::masked_fill(spec.M, spec.omega);
  CMat U = CMat::Zero(t, p);

  DecompositionResult res;
  res.primal_residuals.reserve(static_cast<std::size_t>(spec.knobs.max_iters));
  res.dual_residuals.reserve(static_cast<std::size_t>(spec.knobs.max_iters));
  res.objective.reserve(static_cast<std::size_t>(spec.knobs.max_iters));

  CMat CWt = CMat::Zero(t, p);
  double viol = 0.0;
  const double wnorm = std::sqrt(Lw2);

  for (int iter = 0; iter < spec.knobs.max_iters; ++iter) {
    const double tau_l = 1.0 / rho;
    const CMat L_prev = L;
    const CMat C_prev = C;
    const CMat S_prev = S;

    CMat target = Z - U - CWt - S;
    double nuclear = 0.0;
    if (basis) {
      ShrunkSvd sh = svt_with_value(basis->adjoint() * target, tau_l);
      L = *basis * sh.L;
      nuclear = sh.nuclear;
    } else {
      ShrunkSvd sh = svt_with_value(target, tau_l);
      L = std::move(sh.L);
      nuclear = sh.nuclear;
    }

    CMat B = L + CWt + S - Z + U;
    CMat Cstep = C - (B * Wconj) / Lw2;
    if (spec.support_only) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (!allowed[static_cast<std::size_t>(j)]) Cstep.col(j).setZero();
    }
    C = kernels::group_shrink(Cstep, lam_c / (rho * Lw2));
    CWt.noalias() = C * Wt;

    if (combined) {
      S = kernels::entrywise_shrink(Z - U - L - CWt, lam_s / rho);
    }

    CMat AX = L + CWt + S;
    CMat V = alpha * AX + (1.0 - alpha) * Z;
    CMat Znew = kernels::ball_step(V + U, spec.M, spec.omega, radius);
    U += V - Znew;

    const double r_norm = (AX - Znew).norm();
    const double d_norm = rho * ((L - L_prev).norm() + (C - C_prev).norm() * wnorm +
                                 (S - S_prev).norm() + (Znew - Z).norm() * std::sqrt(2.0 + Lw2));
    Z = std::move(Znew);

    double obj = nuclear + lam_c * C.colwise().norm().sum();
    if (combined) obj += lam_s * S.cwiseAbs().sum();
    res.primal_residuals.push_back(r_norm);
    res.dual_residuals.push_back(d_norm);
    res.objective.push_back(obj);
    res.iterations = iter + 1;

    const double eps_pri =
        sqrt_tp * spec.knobs.tol_abs + spec.knobs.tol_rel * std::max(AX.norm(), Z.norm());
    const double eps_dual = sqrt_tp * spec.knobs.tol_abs +
                            spec.knobs.tol_rel * rho * U.norm() * std::sqrt(2.0 + Lw2);
    if (r_norm <= eps_pri && d_norm <= eps_dual) {
      viol = std::max(
          0.0, std::sqrt(kernels::masked_diff_sqnorm(AX, spec.M, spec.omega)) - radius);
      const double m_norm = std::sqrt(kernels::masked_diff_sqnorm(
          CMat::Zero(t, p), spec.M, spec.omega));
      if (viol <= 1e-6 * (1.0 + m_norm)) {
        res.converged = true;
        break;
      }
    }

    if (spec.knobs.adaptive_rho && (iter % 8) == 7) {
      if (r_norm > 10.0 * d_norm && rho < 1e6) {
        rho *= 2.0;
        U *= 0.5;
      } else if (d_norm > 10.0 * r_norm && rho > 1e-6) {
        rho *= 0.5;
        U *= 2.0;
      }
    }
  }

  CMat AX = L + CWt + S;
  res.constraint_violation =
      std::max(0.0, std::sqrt(kernels::masked_diff_sqnorm(AX, spec.M, spec.omega)) - radius);
  res.L_star = std::move(L);
  res.C_star = std::move(C);
  res.S_star = std::move(S);
  return res;
}

}  // namespace lrcs
