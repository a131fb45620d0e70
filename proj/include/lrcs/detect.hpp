#pragma once

#include <vector>

#include "lrcs/sim.hpp"
#include "lrcs/solver.hpp"
#include "lrcs/types.hpp"

namespace lrcs {

/// Support sets read off a solved decomposition.
struct SupportEstimate {
  std::vector<int> buses;     // columns of C_star with norm above eps1
  std::vector<int> channels;  // columns of C_star*W^T with norm above eps1
};

SupportEstimate extract_support(const CMat& C_star, const CMat& W, double eps1 = 0.002);

/// Spectral norm of the difference of the two column-space projectors.
/// Ranks are read off the singular values with the given relative tolerance.
/// Zero matrices are only comparable to zero matrices (distance 0 to zero,
/// 1 otherwise).
double subspace_distance(const CMat& A, const CMat& B, double rank_tol = 1e-9);

struct DetectionOutcome {
  SupportEstimate estimate;
  /// Projector distance between the leading subspace of L_star (at most
  /// rank(L_bar) directions, so equal-rank projectors are compared) and the
  /// column space of L_bar. Exact noiseless recovery makes the truncation a
  /// no-op because rank(L_star) == rank(L_bar) there.
  double subspace_gap = 0.0;
  bool support_exact = false;   // estimated buses == true buses
  bool channels_exact = false;  // estimated channels == true channels
  bool success = false;         // support_exact and subspace_gap <= eps2
  int false_alarms = 0;         // estimated buses outside the true support
  double clean_channel_rel_err = 0.0;  // L recovery error on unattacked channels
};

/// Score a decomposition against the scenario's ground truth.
DetectionOutcome score(const AttackScenario& scenario, const DecompositionResult& result,
                       double eps1 = 0.002, double eps2 = 0.01);

}  // namespace lrcs
