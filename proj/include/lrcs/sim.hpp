#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrcs/grid.hpp"
#include "lrcs/solver.hpp"
#include "lrcs/types.hpp"

namespace lrcs {

/// Everything needed to regenerate a scenario deterministically.
struct ScenarioConfig {
  int t = 50;
  int p = 50;
  int n = 25;
  int rank = 3;
  std::uint64_t seed = 0;

  /// "gaussian": dense N(0,1) coefficients, used as drawn.
  /// "binary": 0/1 coefficients with fixed row/column degrees, used as drawn.
  /// "ring": the fully connected odd-to-even metered network (p is derived),
  /// used in column-normalized form.
  std::string w_kind = "gaussian";
  int binary_row_ones = 2;
  int binary_col_ones = 5;

  int support_size = 0;             // attacked buses drawn at random when support is empty
  std::vector<int> support;         // explicit attacked buses (0-based), optional
  double attack_magnitude = 1.0;

  double scatter_density = 0.0;
  double sigma = 0.0;
  double keep_fraction = 1.0;

  /// Column norm of the coefficient matrix handed to the solver. 0 picks the
  /// family working point: sqrt(binary_col_ones) for "binary", 1 for "ring",
  /// and for "gaussian" sqrt(2) when noiseless or 1 under noise.
  double w_scale = 0.0;
};

/// A generated instance: ground-truth parts, the assembled measurements, and
/// the observation mask. M = L_bar + C_bar*W^T + S_bar + N, where W is the
/// coefficient matrix stored on the scenario (the same one the solver and the
/// support thresholds should use); its columns all have norm w_scale. The
/// attack itself is drawn against W_bar, so M does not depend on w_scale.
/// Entries of M outside omega are present but carry no meaning downstream.
struct AttackScenario {
  ScenarioConfig config;
  TransformMatrix tm;
  CMat W;
  double w_scale = 1.0;
  CMat L_bar;
  CMat C_bar;
  CMat S_bar;
  CMat N;
  CMat M;
  Mask omega;
  double eta = 0.0;
  std::vector<int> support;            // attacked buses, sorted
  std::vector<int> attacked_channels;  // channels carrying the attack, sorted
  bool cancellation_detected = false;  // channel support lost mass to cancellation
};

/// Rank-r product of independent N(0,1) factors (real-valued).
CMat gen_synthetic_lowrank(int t, int p, int r, std::uint64_t seed);

/// Coefficient matrix for the configured w_kind.
TransformMatrix make_transform(const ScenarioConfig& config);

/// Add an additive corruption confined to the given state columns. Per
/// attacked bus j a state-space profile beta_j with N(0,1)*magnitude entries
/// is drawn against W_bar, so the channel-space corruption is
/// sum_j beta_j W_bar_j^T; C_bar stores the same corruption expressed against
/// the scenario coefficient matrix w_scale*w. Draws are rejected (16 retries)
/// while the corruption lies inside the column space of L_bar.
AttackScenario inject_unobservable(const CMat& L_bar, const TransformMatrix& tm,
                                   const std::vector<int>& support,
                                   const std::vector<double>& magnitudes, std::uint64_t seed,
                                   double w_scale = 1.0);

/// Scatter ceil(density*t*p) N(0,1) entries across S_bar.
AttackScenario inject_scattered(AttackScenario scenario, double density, std::uint64_t seed);

/// Dense N(0, sigma^2) noise; eta is set to the realized ||N||_F.
AttackScenario add_noise(AttackScenario scenario, double sigma, std::uint64_t seed);

/// Keep a uniformly random subset of exactly ceil(keep*t*p) entries observed.
AttackScenario mask_observations(AttackScenario scenario, double keep, std::uint64_t seed);

/// Full pipeline driven by config, with per-stage derived seeds.
AttackScenario generate(const ScenarioConfig& config);

/// Solver input for a scenario.
ProblemSpec to_problem(const AttackScenario& scenario, double lambda,
                       SolveMode mode = SolveMode::Basic, double lambda1 = 1.0,
                       double lambda2 = 0.1);

}  // namespace lrcs
