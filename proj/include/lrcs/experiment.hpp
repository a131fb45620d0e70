#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lrcs/io.hpp"
#include "lrcs/sim.hpp"
#include "lrcs/solver.hpp"

namespace lrcs {

enum class ExperimentFamily { PhaseGrid, NoiseSweep, MaskSweep, CombinedCompare, RingTheory };

std::string family_name(ExperimentFamily family);
ExperimentFamily family_from_name(const std::string& name);

/// One experiment description. Axis lists that stay empty fall back to the
/// family defaults from default_plan; scalar fields cover whatever a family
/// does not sweep.
struct ExperimentPlan {
  ExperimentFamily family = ExperimentFamily::PhaseGrid;

  int t = 50;
  int p = 50;
  int n = 25;
  std::string w_kind = "gaussian";
  int binary_row_ones = 2;
  int binary_col_ones = 5;
  double attack_magnitude = 1.0;
  double w_scale = 0.0;

  int rank = 3;
  int support_size = 3;
  double sigma = 0.0;
  double keep_fraction = 1.0;

  std::vector<int> ranks;
  std::vector<int> support_sizes;
  std::vector<double> sigmas;
  std::vector<double> keep_fractions;
  std::vector<double> densities;
  std::vector<int> ring_sizes;

  int trials_per_cell = 20;
  std::uint64_t base_seed = 1;
  int jobs = 1;

  double lambda = 0.95;
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double eps1 = 0.002;
  double eps2 = 0.01;
  SolverKnobs knobs;

  double psi_tilde = 0.125;
  double c = 0.25;
  std::string rho_policy = "flat";
};

/// Family working points: phase grid sweeps r in 1..8 against k in 0..6 at
/// t=p=50, n=25, lambda 0.95; the noise sweep fixes (r, k) = (3, 3); the mask
/// sweep reuses the phase-grid setup over keep fractions down to 0.01; the
/// method comparison runs the binary-coefficient setup (n=20, r=2, two
/// attacked columns, lambda1=1, lambda2=0.1) over scatter densities; the ring
/// study sweeps even network sizes at rank 1.
ExperimentPlan default_plan(ExperimentFamily family);

/// Aggregated trials of one grid cell. success_rate counts the family's own
/// criterion: exact support together with a small subspace gap for the phase,
/// noise and mask families is relaxed to support alone for the noise sweep
/// and to the subspace criterion alone for the method comparison. The other
/// two rates are always reported alongside. Failed trials (exceptions) are
/// counted and excluded from every mean.
struct CellResult {
  std::vector<std::pair<std::string, double>> coords;
  std::string mode;  // method-comparison solver mode, empty elsewhere
  int trials = 0;
  int failures = 0;
  int successes = 0;
  int support_successes = 0;
  int space_successes = 0;
  double success_rate = 0.0;
  double support_rate = 0.0;
  double space_rate = 0.0;
  double mean_gap = 0.0;
  double mean_iterations = 0.0;
  double mean_false_alarms = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::uint64_t> seeds;
  bool completed = false;

  double coord(const std::string& name) const;  // throws InvalidSize if absent
};

/// Everything a run produces. Deterministic given (plan, base_seed) except
/// the wall_seconds fields. The ring family fills `theory` instead of `cells`.
struct ExperimentReport {
  ExperimentFamily family = ExperimentFamily::PhaseGrid;
  std::uint64_t base_seed = 0;
  int trials_per_cell = 0;
  std::vector<CellResult> cells;
  std::vector<io::TheoryReport> theory;
  bool all_cells_completed = false;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> environment;
};

/// Per-cell trial seeds derive from (base_seed, family tag, cell coordinates,
/// trial index), so they are pairwise distinct across scenario cells and
/// repeat only where a controlled comparison demands identical data: the mask
/// sweep ignores keep_fraction when deriving (its keep=1.0 block reproduces
/// the phase grid), and the method comparison runs all three solver modes on
/// the same draws.
ExperimentReport run_phase_grid(const ExperimentPlan& plan);
ExperimentReport run_noise_sweep(const ExperimentPlan& plan);
ExperimentReport run_mask_sweep(const ExperimentPlan& plan);
ExperimentReport run_combined_compare(const ExperimentPlan& plan);
ExperimentReport run_ring_theory(const ExperimentPlan& plan);
ExperimentReport run_experiment(const ExperimentPlan& plan);

/// Plan files are JSON: {"kind": "plan", "family": "phase_grid", ...} where
/// every other key is optional and falls back to default_plan(family).
ExperimentPlan read_plan(const std::filesystem::path& file);
void write_plan(const std::filesystem::path& file, const ExperimentPlan& plan);

/// Emits report.json, grid.csv (wide success-rate table), curves.csv (one row
/// per cell with coordinates and metrics), and manifest.json (plan echo,
/// seeds, environment) into the directory, creating it if needed.
void write_experiment_report(const std::filesystem::path& dir, const ExperimentPlan& plan,
                             const ExperimentReport& report);

}  // namespace lrcs
