#include "lrcs/detect.hpp"

#include <algorithm>
#include <cmath>

#include "lrcs/errors.hpp"

namespace lrcs {

namespace {

CMat column_space_basis(const CMat& A, double rank_tol) {
  ThinSvd svd = thin_svd(A);
  const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
  if (smax == 0.0) return CMat(A.rows(), 0);
  Eigen::Index r = 0;
  while (r < svd.s.size() && svd.s(r) > rank_tol * smax) ++r;
  if (r < svd.s.size() && svd.s(r) > 0.1 * rank_tol * smax)
    throw RankDeficiencyAmbiguous("singular values straddle the rank tolerance band");
  return svd.U.leftCols(r);
}

}  // namespace

SupportEstimate extract_support(const CMat& C_star, const CMat& W, double eps1) {
  if (C_star.cols() != W.cols()) throw ShapeMismatch("C_star and W must agree on bus count");
  SupportEstimate est;
  for (Eigen::Index j = 0; j < C_star.cols(); ++j)
    if (C_star.col(j).norm() > eps1) est.buses.push_back(static_cast<int>(j));
  const CMat D = C_star * W.transpose();
  for (Eigen::Index k = 0; k < D.cols(); ++k)
    if (D.col(k).norm() > eps1) est.channels.push_back(static_cast<int>(k));
  return est;
}

double subspace_distance(const CMat& A, const CMat& B, double rank_tol) {
  if (A.rows() != B.rows()) throw ShapeMismatch("subspace bases need equal ambient dimension");
  const CMat Ua = column_space_basis(A, rank_tol);
  const CMat Ub = column_space_basis(B, rank_tol);
  if (Ua.cols() == 0 && Ub.cols() == 0) return 0.0;
  if (Ua.cols() == 0 || Ub.cols() == 0) return 1.0;
  const CMat diff = Ua * Ua.adjoint() - Ub * Ub.adjoint();
  ThinSvd svd = thin_svd(diff);
  return svd.s.size() > 0 ? svd.s(0) : 0.0;
}

DetectionOutcome score(const AttackScenario& scenario, const DecompositionResult& result,
                       double eps1, double eps2) {
  DetectionOutcome out;
  out.estimate = extract_support(result.C_star, scenario.W, eps1);

  const bool truth_zero = scenario.L_bar.norm() == 0.0;
  const bool est_zero = result.L_star.norm() <= 1e-9 * std::max(1.0, scenario.M.norm());
  if (truth_zero && est_zero) {
    out.subspace_gap = 0.0;
  } else if (truth_zero || est_zero) {
    out.subspace_gap = 1.0;
  } else {
    ThinSvd truth = thin_svd(scenario.L_bar);
    Eigen::Index r_bar = 0;
    while (r_bar < truth.s.size() && truth.s(r_bar) > 1e-9 * truth.s(0)) ++r_bar;
    ThinSvd est = thin_svd(result.L_star);
    Eigen::Index r_est = 0;
    while (r_est < est.s.size() && est.s(r_est) > 1e-9 * est.s(0)) ++r_est;
    const CMat Ub = truth.U.leftCols(r_bar);
    const CMat Ua = est.U.leftCols(std::min(r_est, r_bar));
    ThinSvd diff = thin_svd(CMat(Ua * Ua.adjoint() - Ub * Ub.adjoint()));
    out.subspace_gap = diff.s.size() > 0 ? diff.s(0) : 0.0;
  }

  out.support_exact = out.estimate.buses == scenario.support;
  out.channels_exact = out.estimate.channels == scenario.attacked_channels;
  out.success = out.support_exact && out.subspace_gap <= eps2;
  for (int b : out.estimate.buses)
    if (!std::binary_search(scenario.support.begin(), scenario.support.end(), b))
      ++out.false_alarms;

  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 0; k < scenario.L_bar.cols(); ++k) {
    if (std::binary_search(scenario.attacked_channels.begin(), scenario.attacked_channels.end(),
                           static_cast<int>(k)))
      continue;
    num += (result.L_star.col(k) - scenario.L_bar.col(k)).squaredNorm();
    den += scenario.L_bar.col(k).squaredNorm();
  }
  out.clean_channel_rel_err = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return out;
}

}  // namespace lrcs
