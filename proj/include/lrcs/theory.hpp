#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrcs/types.hpp"

namespace lrcs {

/// All guarantee formulas in this header assume W has unit-norm columns.
/// Callers holding a scenario in solver coordinates (W = w_scale * unit)
/// divide W by w_scale and multiply C by w_scale before calling in.

/// sigma_k = max over column sets of size at most k of ||(W_I^dag W_I)^-1||.
/// Exhaustive enumeration when combinatorially cheap, otherwise a greedy
/// lower bound paired with the Gershgorin upper bound; `value` then carries
/// the upper bound so downstream calculus stays conservative.
struct SigmaEstimate {
  int k = 0;
  double value = 1.0;
  bool exhaustive = true;
  double greedy_lower = 1.0;
  double gershgorin_upper = 1.0;  // +inf when k*mu >= 1
};

struct IncoherenceStats {
  double epsilon = 0.0;  // largest column norm of Vbar^dag * conj(W)
  double mu = 0.0;       // largest |W_i^dag W_j| over distinct column pairs
  double rho = 0.0;      // p * max-row-norm(Vbar)^2 / r
  int r = 0;
  int t = 0;
  int p = 0;
  int n = 0;
  std::vector<SigmaEstimate> sigma;  // one entry per requested k

  const SigmaEstimate& sigma_entry(int k) const;  // throws InvalidSize if absent
  double sigma_for(int k) const { return sigma_entry(k).value; }
};

/// Rank of L_bar is read off singular values > rank_tol * s_max; a singular
/// value inside (0.1*rank_tol*s_max, rank_tol*s_max] makes the rank call
/// ambiguous and throws RankDeficiencyAmbiguous.
IncoherenceStats compute_incoherence(const CMat& L_bar, const CMat& W,
                                     const std::vector<int>& ks, double rank_tol = 1e-9);

/// (1 - (k-1)*mu)^-1; requires k*mu < 1 (throws BoundInapplicable otherwise).
double gershgorin_sigma_bound(double mu, int k);

struct LambdaRange {
  double psi_tilde = 0.0;
  double c = 0.0;
  int k_tilde = 0;
  bool noisy = false;  // which window `feasible` refers to
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lambda_min_noisy = 0.0;
  double lambda_max_noisy = 0.0;
  bool feasible = false;
};

/// Evaluates both the noiseless and the noisy window; `noisy` selects which
/// one drives the feasible verdict (k_tilde*mu <= c, positive lambda_min
/// denominator, and a nonempty interval). A nonpositive denominator makes the
/// range infeasible (lambda_min = +inf) rather than throwing. (psi_tilde, c)
/// must satisfy (2-psi)*sqrt(psi)/(1-psi) <= sqrt((1+c)/(1-c)), else
/// InvalidPsiC.
LambdaRange lambda_range(const IncoherenceStats& stats, double psi_tilde, double c,
                         int k_tilde, bool noisy = false);

/// Numerical dual certificate for one instance, built at the optimum of the
/// restricted problem (column space of L confined to span(L_bar), column
/// support of C confined to the support of C_bar) and assembled as
/// Q = U*Vhat^dag + Phi - Delta1 - Delta2 with a truncated Neumann series.
struct CertificateReport {
  CMat Q;
  CMat H_hat;                  // t x |support|, columns follow `support` order
  std::vector<int> support;    // column support of C_bar, sorted
  std::vector<int> forced;     // support columns pinned to C'_i/||C'_i||
  CMat U_basis;                // t x r, column space of L_bar
  CMat V_hat;                  // p x r, row space of the restricted optimum
  double lambda = 0.0;
  double h_residual = 0.0;     // ||Vhat^dag conj(W)_I - lambda U^dag H_hat||_F
  bool approximate = false;    // h_residual > 1e-8
  double psi = 0.0;            // ||P_Vhat P_WI P_Vhat||
  int neumann_terms = 0;
  double neumann_tail = 0.0;   // psi^(m+1)/(1-psi), subtracted from margin b
  double q_norm_f = 0.0;
  double a_residual = 0.0;     // ||P_T(Q) - U Vhat^dag||_F
  double b_value = 0.0;        // ||P_Tperp(Q)||
  double c_residual = 0.0;     // ||(Q conj(W))_I - lambda H_hat||_F
  double c_free_max = 0.0;     // largest norm of a non-pinned H_hat column
  double d_value = 0.0;        // ||(Q conj(W))_{I^c}||_{inf,2}
  double margin_a = 0.0, margin_b = 0.0, margin_c = 0.0, margin_d = 0.0;
  bool valid = false;          // margins under noiseless thresholds
  std::string note;            // divergence or empty-support remarks
};

/// An empty support degenerates to Q = U V^dag with only the column-norm cap
/// left to check; psi >= 1 is reported as an invalid certificate (Neumann
/// series divergent), not thrown. SingularGram if the support Gram matrix of
/// W is not invertible.
CertificateReport build_certificate(const CMat& L_bar, const CMat& C_bar, const CMat& W,
                                    double lambda);

struct ConditionVerdict {
  bool a = false, b = false, c = false, d = false;
  bool all = false;
  double margin_a = 0.0, margin_b = 0.0, margin_c = 0.0, margin_d = 0.0;
};

/// Applies the noiseless thresholds (1 on the spectral cap, lambda on the
/// off-support column cap) or the noisy ones (1/2, lambda/2) to a built
/// report. Equality conditions (a) and (c) use a 1e-8 residual gate in both
/// modes.
ConditionVerdict verify_conditions(const CertificateReport& report, bool noisy);

struct NoisyBounds {
  double bound_L = 0.0;
  double bound_C = 0.0;
};

/// Frobenius error bounds of the noisy recovery guarantee, evaluated exactly
/// as stated with theta = min(t, p).
NoisyBounds noisy_error_bounds(const IncoherenceStats& stats, double lambda, int k,
                               double eta, int t, int p, int r, double psi_tilde);

/// True when no nonzero matrix lies in both the span of matrices with column
/// support inside `channels` and the row space of V (p x r, orthonormal
/// columns): the submatrix of V with those rows deleted must keep full column
/// rank (smallest singular value > tol).
bool trivial_support_rowspace_intersection(const CMat& V, const std::vector<int>& channels,
                                           double tol = 1e-9);

/// A synthetic instance constructed to satisfy the recovery guarantee: W is
/// resampled for low column coherence, the row space of L_bar is drawn nearly
/// orthogonal to the column space of conj(W) so epsilon is small, and lambda
/// sits mid-window. Matrices are in unit-column-W coordinates. Returns
/// nullopt when no feasible draw is found within the retry budget.
struct CertifiedInstance {
  CMat L_bar;
  CMat C_bar;
  CMat W;
  std::vector<int> support;
  IncoherenceStats stats;
  LambdaRange range;
  double lambda = 0.0;
};

std::optional<CertifiedInstance> make_certified_instance(int t, int p, int n, int r, int k,
                                                         std::uint64_t seed,
                                                         double psi_tilde = 0.125,
                                                         double c = 0.25);

/// Same construction over a caller-supplied unit-column W (for instance a
/// sparse grid map, where the attacked channel set stays a strict subset and
/// the support/row-space intersection test has content).
std::optional<CertifiedInstance> make_certified_instance_for(const CMat& W, int t, int r, int k,
                                                             std::uint64_t seed,
                                                             double psi_tilde = 0.125,
                                                             double c = 0.25);

}  // namespace lrcs
