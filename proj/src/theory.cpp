#include "lrcs/theory.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lrcs/errors.hpp"
#include "lrcs/rng.hpp"
#include "lrcs/solver.hpp"

namespace lrcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RankedSvd {
  CMat U;
  CMat V;
  RVec s;
  Eigen::Index r = 0;
};

/// Rank read off singular values > tol*s_max. When `strict_band` is set, a
/// singular value falling inside (0.1*tol*s_max, tol*s_max] throws instead of
/// being silently dropped.
RankedSvd ranked_svd(const CMat& X, double tol, bool strict_band) {
  RankedSvd out;
  ThinSvd svd = thin_svd(X);
  const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
  Eigen::Index r = 0;
  while (r < svd.s.size() && svd.s(r) > tol * smax) ++r;
  if (strict_band && r < svd.s.size() && svd.s(r) > 0.1 * tol * smax)
    throw RankDeficiencyAmbiguous("singular values straddle the rank tolerance band");
  out.U = svd.U.leftCols(r);
  out.V = svd.V.leftCols(r);
  out.s = svd.s.head(r);
  out.r = r;
  return out;
}

double spectral_norm(const CMat& X) {
  if (X.rows() == 0 || X.cols() == 0) return 0.0;
  ThinSvd svd = thin_svd(X);
  return svd.s.size() > 0 ? svd.s(0) : 0.0;
}

double max_column_norm(const CMat& X) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) m = std::max(m, X.col(j).norm());
  return m;
}

/// Smallest eigenvalue of a Hermitian PSD Gram matrix.
double gram_min_eig(const CMat& G) {
  Eigen::SelfAdjointEigenSolver<CMat> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double binomial_count(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > 1e18) return 1e18;
  }
  return c;
}

double sigma_of_subset(const CMat& gram, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  CMat sub(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) sub(a, b) = gram(idx[a], idx[b]);
  const double lo = gram_min_eig(sub);
  return lo > 1e-300 ? 1.0 / lo : kInf;
}

double sigma_exhaustive(const CMat& gram, int k) {
  const int n = static_cast<int>(gram.rows());
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  double best = 0.0;
  while (true) {
    best = std::max(best, sigma_of_subset(gram, idx));
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

double sigma_greedy(const CMat& gram, int k) {
  const int n = static_cast<int>(gram.rows());
  std::vector<int> picked;
  if (k == 1) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = gram(i, i).real();
      best = std::max(best, d > 0.0 ? 1.0 / d : kInf);
    }
    return best;
  }
  int bi = 0, bj = 1;
  double bm = -1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(gram(i, j)) > bm) {
        bm = std::abs(gram(i, j));
        bi = i;
        bj = j;
      }
  picked = {bi, bj};
  double cur = sigma_of_subset(gram, picked);
  while (static_cast<int>(picked.size()) < k) {
    int arg = -1;
    double best = cur;
    for (int cand = 0; cand < n; ++cand) {
      if (std::find(picked.begin(), picked.end(), cand) != picked.end()) continue;
      std::vector<int> trial = picked;
      trial.push_back(cand);
      const double v = sigma_of_subset(gram, trial);
      if (v >= best) {
        best = v;
        arg = cand;
      }
    }
    if (arg < 0) {
      for (int cand = 0; cand < n; ++cand)
        if (std::find(picked.begin(), picked.end(), cand) == picked.end()) {
          arg = cand;
          break;
        }
      std::vector<int> trial = picked;
      trial.push_back(arg);
      best = sigma_of_subset(gram, trial);
    }
    picked.push_back(arg);
    cur = best;
  }
  return cur;
}

CMat orthonormal_columns(const CMat& B, double tol = 1e-12) {
  if (B.cols() == 0) return CMat(B.rows(), 0);
  ThinSvd svd = thin_svd(B);
  const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
  Eigen::Index r = 0;
  while (r < svd.s.size() && svd.s(r) > tol * smax) ++r;
  return svd.U.leftCols(r);
}

}  // namespace

const SigmaEstimate& IncoherenceStats::sigma_entry(int k) const {
  for (const SigmaEstimate& e : sigma)
    if (e.k == k) return e;
  throw InvalidSize("sigma_k was not computed for the requested k");
}

IncoherenceStats compute_incoherence(const CMat& L_bar, const CMat& W,
                                     const std::vector<int>& ks, double rank_tol) {
  if (L_bar.size() == 0 || L_bar.norm() == 0.0) throw InvalidSize("L must be nonzero");
  if (W.rows() != L_bar.cols()) throw ShapeMismatch("W must have one row per channel");
  const int n = static_cast<int>(W.cols());

  IncoherenceStats out;
  out.t = static_cast<int>(L_bar.rows());
  out.p = static_cast<int>(L_bar.cols());
  out.n = n;

  RankedSvd svd = ranked_svd(L_bar, rank_tol, true);
  out.r = static_cast<int>(svd.r);
  out.epsilon = max_column_norm(svd.V.adjoint() * W.conjugate());

  double vinf = 0.0;
  for (Eigen::Index i = 0; i < svd.V.rows(); ++i) vinf = std::max(vinf, svd.V.row(i).norm());
  out.rho = static_cast<double>(out.p) * vinf * vinf / static_cast<double>(out.r);

  const CMat gram = W.adjoint() * W;
  double mu = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) mu = std::max(mu, std::abs(gram(i, j)));
  out.mu = mu;

  for (int k : ks) {
    if (k < 1 || k > n) throw InvalidSize("sigma_k needs 1 <= k <= n");
    SigmaEstimate e;
    e.k = k;
    e.gershgorin_upper = k * mu < 1.0 ? 1.0 / (1.0 - (k - 1) * mu) : kInf;
    if (n <= 20 || binomial_count(n, k) <= 1e5) {
      e.exhaustive = true;
      e.value = sigma_exhaustive(gram, k);
      e.greedy_lower = e.value;
    } else {
      e.exhaustive = false;
      e.greedy_lower = sigma_greedy(gram, k);
      e.value = e.gershgorin_upper;
    }
    out.sigma.push_back(e);
  }
  return out;
}

double gershgorin_sigma_bound(double mu, int k) {
  if (k < 1) throw InvalidSize("k must be positive");
  if (k * mu >= 1.0) throw BoundInapplicable("bound needs k*mu < 1");
  return 1.0 / (1.0 - (k - 1) * mu);
}

LambdaRange lambda_range(const IncoherenceStats& stats, double psi_tilde, double c,
                         int k_tilde, bool noisy) {
  if (!(psi_tilde > 0.0 && psi_tilde < 1.0 && c > 0.0 && c < 1.0))
    throw InvalidPsiC("psi and c must lie in (0,1)");
  const double lhs = (2.0 - psi_tilde) * std::sqrt(psi_tilde) / (1.0 - psi_tilde);
  const double rhs = std::sqrt((1.0 + c) / (1.0 - c));
  if (lhs > rhs + 1e-12) throw InvalidPsiC("(psi, c) violate the admissibility inequality");
  if (k_tilde < 1) throw InvalidSize("k must be positive");

  LambdaRange out;
  out.psi_tilde = psi_tilde;
  out.c = c;
  out.k_tilde = k_tilde;
  out.noisy = noisy;

  const double sigma = stats.sigma_for(k_tilde);
  const double a = 1.0 + 1.0 / (2.0 - psi_tilde);
  const double ks_mu = a * k_tilde * sigma * stats.mu;

  const double den = 1.0 - ks_mu;
  out.lambda_min = den > 0.0 ? a * stats.epsilon / den : kInf;
  out.lambda_max = std::sqrt(psi_tilde / (k_tilde * sigma));

  const double den_noisy = 0.5 - ks_mu;
  out.lambda_min_noisy = den_noisy > 0.0 ? a * stats.epsilon / den_noisy : kInf;
  out.lambda_max_noisy = 0.5 * std::sqrt(psi_tilde / (k_tilde * sigma));

  const double lo = noisy ? out.lambda_min_noisy : out.lambda_min;
  const double hi = noisy ? out.lambda_max_noisy : out.lambda_max;
  out.feasible = k_tilde * stats.mu <= c && std::isfinite(lo) && lo <= hi;
  return out;
}

CertificateReport build_certificate(const CMat& L_bar, const CMat& C_bar, const CMat& W,
                                    double lambda) {
  const Eigen::Index t = L_bar.rows();
  const Eigen::Index p = L_bar.cols();
  const Eigen::Index n = W.cols();
  if (W.rows() != p) throw ShapeMismatch("W must have one row per channel");
  if (C_bar.rows() != t || C_bar.cols() != n) throw ShapeMismatch("C must be t x n");
  if (!(lambda > 0.0)) throw InvalidSize("lambda must be positive");
  if (L_bar.norm() == 0.0) throw InvalidSize("L must be nonzero");

  CertificateReport rep;
  rep.lambda = lambda;

  const double cmax = max_column_norm(C_bar);
  for (Eigen::Index j = 0; j < n; ++j)
    if (C_bar.col(j).norm() > 1e-12 * cmax && cmax > 0.0)
      rep.support.push_back(static_cast<int>(j));
  const int m = static_cast<int>(rep.support.size());

  const CMat Wc = W.conjugate();

  if (m == 0) {
    RankedSvd bar = ranked_svd(L_bar, 1e-9, false);
    rep.U_basis = bar.U;
    rep.V_hat = bar.V;
    rep.Q = bar.U * bar.V.adjoint();
    rep.q_norm_f = rep.Q.norm();
    rep.H_hat = CMat(t, 0);
    rep.d_value = max_column_norm(rep.Q * Wc);
    rep.margin_a = 1e-8 * rep.q_norm_f;
    rep.margin_b = 1.0;
    rep.margin_c = 1e-8;
    rep.margin_d = lambda - rep.d_value;
    rep.valid = rep.margin_d >= 0.0;
    rep.note = "empty support: certificate degenerates to the low-rank polar factor";
    return rep;
  }

  RankedSvd bar = ranked_svd(L_bar, 1e-9, false);

  ProblemSpec oracle;
  oracle.M = L_bar + C_bar * W.transpose();
  oracle.omega = full_mask(t, p);
  oracle.eta = 0.0;
  oracle.W = W;
  oracle.lambda = lambda;
  oracle.col_space = bar.U;
  oracle.support_only = rep.support;
  oracle.knobs.max_iters = 100000;
  oracle.knobs.tol_abs = 1e-12;
  oracle.knobs.tol_rel = 1e-10;
  DecompositionResult opt = solve(oracle);

  RankedSvd prime = ranked_svd(opt.L_star, 1e-9, false);
  const CMat& U = prime.U;
  const CMat& V = prime.V;
  const CMat polar = U * V.adjoint();
  rep.U_basis = U;
  rep.V_hat = V;

  CMat Wsupp(p, m), Wcsupp(p, m);
  for (int j = 0; j < m; ++j) {
    Wsupp.col(j) = W.col(rep.support[static_cast<std::size_t>(j)]);
    Wcsupp.col(j) = Wc.col(rep.support[static_cast<std::size_t>(j)]);
  }

  const double copt_max = max_column_norm(opt.C_star);
  CMat H(t, m);
  double free_max = 0.0;
  for (int j = 0; j < m; ++j) {
    const CVec col = opt.C_star.col(rep.support[static_cast<std::size_t>(j)]);
    const double nrm = col.norm();
    if (nrm > 1e-8 * std::max(1.0, copt_max)) {
      H.col(j) = col / nrm;
      rep.forced.push_back(rep.support[static_cast<std::size_t>(j)]);
    } else {
      H.col(j) = polar * Wcsupp.col(j) / lambda;
      free_max = std::max(free_max, H.col(j).norm());
    }
  }
  rep.H_hat = H;
  rep.c_free_max = free_max;
  rep.h_residual = (V.adjoint() * Wcsupp - lambda * U.adjoint() * H).norm();
  rep.approximate = rep.h_residual > 1e-8;

  const CMat gram_c = Wsupp.transpose() * Wcsupp;
  Eigen::SelfAdjointEigenSolver<CMat> ges(gram_c);
  const double gmin = ges.eigenvalues().minCoeff();
  const double gmax = ges.eigenvalues().maxCoeff();
  if (gmin <= 1e-12 * std::max(gmax, 1e-300))
    throw SingularGram("support columns of W are numerically dependent");
  const CMat gram_inv = ges.eigenvectors() *
                        ges.eigenvalues().cwiseInverse().asDiagonal() *
                        ges.eigenvectors().adjoint();

  const CMat Pw = Wcsupp * gram_inv * Wsupp.transpose();
  const CMat Vp = V * V.adjoint();
  const CMat G = Vp * Pw * Vp;
  Eigen::SelfAdjointEigenSolver<CMat> pes(G, Eigen::EigenvaluesOnly);
  rep.psi = std::max(std::abs(pes.eigenvalues().minCoeff()),
                     std::abs(pes.eigenvalues().maxCoeff()));

  if (rep.psi >= 1.0 - 1e-12) {
    rep.valid = false;
    rep.note = "neumann series divergent: psi >= 1";
    rep.margin_a = rep.margin_b = rep.margin_c = rep.margin_d = -kInf;
    return rep;
  }

  CMat series = CMat::Identity(p, p);
  CMat term = G;
  double term_norm = rep.psi;
  int count = 0;
  while (term_norm >= 1e-12 && count < 10000) {
    series += term;
    term = term * G;
    term_norm *= rep.psi;
    ++count;
  }
  rep.neumann_terms = count;
  rep.neumann_tail =
      rep.psi > 0.0 ? std::pow(rep.psi, count + 1) / (1.0 - rep.psi) : 0.0;

  const CMat Phi = lambda * H * gram_inv * Wsupp.transpose();
  const CMat Delta1 = U * (U.adjoint() * Phi);
  CMat X = Phi * Vp * series * Vp * (CMat::Identity(p, p) - Pw);
  const CMat Delta2 = X - U * (U.adjoint() * X);
  rep.Q = polar + Phi - Delta1 - Delta2;
  rep.q_norm_f = rep.Q.norm();

  const CMat UtQ = U.adjoint() * rep.Q;
  const CMat PT = U * UtQ + rep.Q * Vp - U * (UtQ * Vp);
  rep.a_residual = (PT - polar).norm();
  CMat E = rep.Q - U * UtQ;
  E -= E * Vp;
  rep.b_value = spectral_norm(E);

  const CMat QW = rep.Q * Wc;
  CMat QWsupp(t, m);
  for (int j = 0; j < m; ++j) QWsupp.col(j) = QW.col(rep.support[static_cast<std::size_t>(j)]);
  rep.c_residual = (QWsupp - lambda * H).norm();
  double dmax = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::find(rep.support.begin(), rep.support.end(), static_cast<int>(j)) !=
        rep.support.end())
      continue;
    dmax = std::max(dmax, QW.col(j).norm());
  }
  rep.d_value = dmax;

  rep.margin_a = 1e-8 * rep.q_norm_f - rep.a_residual;
  rep.margin_b = 1.0 - rep.b_value - rep.neumann_tail;
  rep.margin_c = std::min(1e-8 - rep.c_residual, 1.0 - rep.c_free_max);
  rep.margin_d = lambda - rep.d_value;
  rep.valid = rep.margin_a >= 0.0 && rep.margin_b >= 0.0 && rep.margin_c >= 0.0 &&
              rep.margin_d >= 0.0;
  return rep;
}

ConditionVerdict verify_conditions(const CertificateReport& report, bool noisy) {
  ConditionVerdict v;
  if (report.Q.size() == 0) {
    v.margin_a = v.margin_b = v.margin_c = v.margin_d = -kInf;
    return v;
  }
  const double thr_b = noisy ? 0.5 : 1.0;
  const double thr_d = noisy ? report.lambda / 2.0 : report.lambda;
  v.margin_a = 1e-8 * report.q_norm_f - report.a_residual;
  v.margin_b = thr_b - report.b_value - report.neumann_tail;
  v.margin_c = std::min(1e-8 - report.c_residual, 1.0 - report.c_free_max);
  v.margin_d = thr_d - report.d_value;
  v.a = v.margin_a >= 0.0;
  v.b = v.margin_b >= 0.0;
  v.c = v.margin_c >= 0.0;
  v.d = v.margin_d >= 0.0;
  v.all = v.a && v.b && v.c && v.d;
  return v;
}

NoisyBounds noisy_error_bounds(const IncoherenceStats& stats, double lambda, int k,
                               double eta, int t, int p, int r, double psi_tilde) {
  const double theta = static_cast<double>(std::min(t, p));
  const double mu = stats.mu;
  const double sigma = stats.sigma_for(k);
  const double n = static_cast<double>(stats.n);
  const double root = std::sqrt(theta + 3.0 * r);
  const double wn = std::sqrt(1.0 + (n - 1.0) * mu);
  const double wk = std::sqrt(1.0 + (k - 1.0) * mu);

  NoisyBounds out;
  out.bound_L = (2.0 - psi_tilde + (lambda + (2.0 - psi_tilde) * wn) / lambda * root) *
                2.0 * eta / (1.0 - psi_tilde);
  out.bound_C =
      (1.0 + ((lambda + wn) / lambda + (1.0 - psi_tilde) / (lambda * sigma * wk)) * root) *
      2.0 * eta * sigma * wk / (1.0 - psi_tilde);
  return out;
}

bool trivial_support_rowspace_intersection(const CMat& V, const std::vector<int>& channels,
                                           double tol) {
  if (V.cols() == 0) return true;
  std::vector<bool> drop(static_cast<std::size_t>(V.rows()), false);
  for (int ch : channels) {
    if (ch < 0 || ch >= V.rows()) throw InvalidSize("channel index out of range");
    drop[static_cast<std::size_t>(ch)] = true;
  }
  const Eigen::Index kept = V.rows() - static_cast<Eigen::Index>(channels.size());
  if (kept < V.cols()) return false;
  CMat sub(kept, V.cols());
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    if (!drop[static_cast<std::size_t>(i)]) sub.row(at++) = V.row(i);
  ThinSvd svd = thin_svd(sub);
  return svd.s.size() == sub.cols() && svd.s(svd.s.size() - 1) > tol;
}

namespace {

std::optional<CertifiedInstance> certified_attempt(const CMat& W, int t, int r, int k,
                                                   Rng& rng, double psi_tilde, double c) {
  const Eigen::Index p = W.rows();
  const Eigen::Index n = W.cols();

  CMat span = orthonormal_columns(W.conjugate());
  CMat g0(p, r);
  for (Eigen::Index jj = 0; jj < r; ++jj)
    for (Eigen::Index ii = 0; ii < p; ++ii) g0(ii, jj) = Complex(rng.gaussian(), 0.0);
  CMat v_raw = g0 - 0.98 * (span * (span.adjoint() * g0));
  CMat Vb = orthonormal_columns(v_raw);
  if (Vb.cols() < r) return std::nullopt;

  CMat gu(t, r);
  for (Eigen::Index jj = 0; jj < r; ++jj)
    for (Eigen::Index ii = 0; ii < t; ++ii) gu(ii, jj) = Complex(rng.gaussian(), 0.0);
  CMat Ub = orthonormal_columns(gu);
  if (Ub.cols() < r) return std::nullopt;

  RVec sv(r);
  const double base_sv = 0.35 * std::sqrt(static_cast<double>(t) * p);
  for (int i = 0; i < r; ++i)
    sv(i) = base_sv * (1.0 - 0.5 * (r > 1 ? static_cast<double>(i) / (r - 1) : 0.0));
  CMat L = Ub * sv.asDiagonal() * Vb.adjoint();

  IncoherenceStats stats = compute_incoherence(L, W, {k});
  if (stats.r != r) return std::nullopt;
  LambdaRange range = lambda_range(stats, psi_tilde, c, k, false);
  if (!range.feasible) return std::nullopt;

  std::vector<int> support;
  while (static_cast<int>(support.size()) < k) {
    const int cand = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (std::find(support.begin(), support.end(), cand) == support.end())
      support.push_back(cand);
  }
  std::sort(support.begin(), support.end());

  CMat C = CMat::Zero(t, n);
  for (int j : support) {
    CVec col(t);
    for (Eigen::Index ii = 0; ii < t; ++ii) col(ii) = Complex(rng.gaussian(), 0.0);
    C.col(j) = col / col.norm() * std::sqrt(static_cast<double>(t));
  }
  const CMat D = C * W.transpose();
  if ((D - Ub * (Ub.adjoint() * D)).norm() <= 1e-6 * D.norm()) return std::nullopt;

  CertifiedInstance inst;
  inst.L_bar = std::move(L);
  inst.C_bar = std::move(C);
  inst.W = W;
  inst.support = std::move(support);
  inst.stats = std::move(stats);
  inst.range = range;
  inst.lambda = 0.5 * (range.lambda_min + range.lambda_max);
  return inst;
}

}  // namespace

std::optional<CertifiedInstance> make_certified_instance(int t, int p, int n, int r, int k,
                                                         std::uint64_t seed,
                                                         double psi_tilde, double c) {
  if (t < 1 || p < 1 || n < 1 || r < 1 || k < 1 || k > n)
    throw InvalidSize("instance dimensions must be positive with k <= n");
  if (p - n < r) throw InvalidSize("needs p - n >= r to suppress the coefficient span");

  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng(Rng::derive(seed, 11, static_cast<std::uint64_t>(attempt)));

    CMat W;
    double mu_best = kInf;
    for (int draw = 0; draw < 16; ++draw) {
      CMat g(p, n);
      for (Eigen::Index jj = 0; jj < n; ++jj)
        for (Eigen::Index ii = 0; ii < p; ++ii) g(ii, jj) = Complex(rng.gaussian(), 0.0);
      CMat base = orthonormal_columns(g);
      if (base.cols() < n) continue;
      CMat cand = base;
      for (Eigen::Index jj = 0; jj < n; ++jj) {
        for (Eigen::Index ii = 0; ii < p; ++ii)
          cand(ii, jj) += Complex(0.25 / std::sqrt(static_cast<double>(p)) * rng.gaussian(), 0.0);
        cand.col(jj) /= cand.col(jj).norm();
      }
      const CMat gram = cand.adjoint() * cand;
      double mu = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) mu = std::max(mu, std::abs(gram(i, j)));
      if (mu < mu_best) {
        mu_best = mu;
        W = cand;
      }
    }
    if (W.size() == 0) continue;

    std::optional<CertifiedInstance> inst = certified_attempt(W, t, r, k, rng, psi_tilde, c);
    if (inst) return inst;
  }
  return std::nullopt;
}

std::optional<CertifiedInstance> make_certified_instance_for(const CMat& W, int t, int r, int k,
                                                             std::uint64_t seed,
                                                             double psi_tilde, double c) {
  const int p = static_cast<int>(W.rows());
  const int n = static_cast<int>(W.cols());
  if (t < 1 || r < 1 || k < 1 || k > n)
    throw InvalidSize("instance dimensions must be positive with k <= n");
  if (p - n < r) throw InvalidSize("needs p - n >= r to suppress the coefficient span");

  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng(Rng::derive(seed, 12, static_cast<std::uint64_t>(attempt)));
    std::optional<CertifiedInstance> inst = certified_attempt(W, t, r, k, rng, psi_tilde, c);
    if (inst) return inst;
  }
  return std::nullopt;
}

}  // namespace lrcs
