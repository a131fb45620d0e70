#include "lrcs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "lrcs/detect.hpp"
#include "lrcs/errors.hpp"
#include "lrcs/grid.hpp"
#include "lrcs/rng.hpp"
#include "lrcs/theory.hpp"

namespace lrcs {
namespace {

using nlohmann::json;

constexpr std::uint64_t kTagPhaseAndMask = 21;  // shared so keep=1.0 replays the phase grid
constexpr std::uint64_t kTagNoise = 22;
constexpr std::uint64_t kTagCompare = 24;
constexpr std::uint64_t kTagRing = 25;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct TrialOutcome {
  bool ok = false;
  bool success = false;
  bool support = false;
  bool space = false;
  double gap = 0.0;
  int iterations = 0;
  int false_alarms = 0;
};

/// Runs `count` trials, possibly on a small thread pool, and reduces the
/// outcomes in trial order so the aggregate is independent of scheduling.
template <typename Fn>
void run_trials(CellResult& cell, int count, int jobs, Fn&& trial) {
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(count));
  const double start = now_seconds();
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) outcomes[static_cast<std::size_t>(i)] = trial(i);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        outcomes[static_cast<std::size_t>(i)] = trial(i);
      }
    };
    std::vector<std::thread> pool;
    const int width = std::min(jobs, count);
    pool.reserve(static_cast<std::size_t>(width));
    for (int w = 0; w < width; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  cell.wall_seconds = now_seconds() - start;

  cell.trials = count;
  double gap_sum = 0.0, iter_sum = 0.0, alarm_sum = 0.0;
  for (const TrialOutcome& o : outcomes) {
    if (!o.ok) {
      ++cell.failures;
      continue;
    }
    cell.successes += o.success ? 1 : 0;
    cell.support_successes += o.support ? 1 : 0;
    cell.space_successes += o.space ? 1 : 0;
    gap_sum += o.gap;
    iter_sum += o.iterations;
    alarm_sum += o.false_alarms;
  }
  const int done = count - cell.failures;
  const double denom = std::max(done, 1);
  cell.success_rate = cell.successes / denom;
  cell.support_rate = cell.support_successes / denom;
  cell.space_rate = cell.space_successes / denom;
  cell.mean_gap = gap_sum / denom;
  cell.mean_iterations = iter_sum / denom;
  cell.mean_false_alarms = alarm_sum / denom;
  cell.completed = true;
}

enum class Criterion { Full, Support, Space };

TrialOutcome score_trial(const AttackScenario& scenario, const DecompositionResult& result,
                         const ExperimentPlan& plan, Criterion criterion) {
  const DetectionOutcome out = score(scenario, result, plan.eps1, plan.eps2);
  TrialOutcome o;
  o.ok = true;
  o.support = out.support_exact;
  o.space = out.subspace_gap <= plan.eps2;
  switch (criterion) {
    case Criterion::Full: o.success = out.success; break;
    case Criterion::Support: o.success = out.support_exact; break;
    case Criterion::Space: o.success = o.space; break;
  }
  o.gap = out.subspace_gap;
  o.iterations = result.iterations;
  o.false_alarms = out.false_alarms;
  return o;
}

ScenarioConfig base_config(const ExperimentPlan& plan) {
  ScenarioConfig cfg;
  cfg.t = plan.t;
  cfg.p = plan.p;
  cfg.n = plan.n;
  cfg.w_kind = plan.w_kind;
  cfg.binary_row_ones = plan.binary_row_ones;
  cfg.binary_col_ones = plan.binary_col_ones;
  cfg.attack_magnitude = plan.attack_magnitude;
  cfg.w_scale = plan.w_scale;
  cfg.rank = plan.rank;
  cfg.support_size = plan.support_size;
  cfg.sigma = plan.sigma;
  cfg.keep_fraction = plan.keep_fraction;
  return cfg;
}

void require_family(const ExperimentPlan& plan, ExperimentFamily family) {
  if (plan.family != family)
    throw InvalidSize("plan family is " + family_name(plan.family) + ", expected " +
                      family_name(family));
  if (plan.trials_per_cell < 1) throw InvalidSize("trials_per_cell must be at least 1");
}

ExperimentReport report_shell(const ExperimentPlan& plan) {
  ExperimentReport report;
  report.family = plan.family;
  report.base_seed = plan.base_seed;
  report.trials_per_cell = plan.trials_per_cell;
  report.environment = io::environment_fingerprint();
  return report;
}

void finish(ExperimentReport& report, double start) {
  report.all_cells_completed = true;
  for (const CellResult& cell : report.cells)
    if (!cell.completed) report.all_cells_completed = false;
  report.wall_seconds = now_seconds() - start;
}

/// Phase-grid cell over (r, k); the mask sweep reuses it with its keep
/// fraction applied on top of the same seeds.
CellResult grid_cell(const ExperimentPlan& plan, int r, int k, double keep) {
  CellResult cell;
  cell.coords = {{"r", static_cast<double>(r)}, {"k", static_cast<double>(k)}};
  if (plan.family == ExperimentFamily::MaskSweep)
    cell.coords.insert(cell.coords.begin(), {"keep", keep});
  const std::uint64_t code = static_cast<std::uint64_t>(r) * 4096u + static_cast<std::uint64_t>(k);
  for (int i = 0; i < plan.trials_per_cell; ++i)
    cell.seeds.push_back(Rng::derive(plan.base_seed, kTagPhaseAndMask, code, static_cast<std::uint64_t>(i + 1)));
  run_trials(cell, plan.trials_per_cell, plan.jobs, [&](int i) {
    TrialOutcome o;
    try {
      ScenarioConfig cfg = base_config(plan);
      cfg.rank = r;
      cfg.support_size = k;
      cfg.keep_fraction = keep;
      cfg.seed = cell.seeds[static_cast<std::size_t>(i)];
      const AttackScenario scenario = generate(cfg);
      ProblemSpec spec = to_problem(scenario, plan.lambda);
      spec.knobs = plan.knobs;
      const DecompositionResult result = solve(spec);
      o = score_trial(scenario, result, plan, Criterion::Full);
    } catch (const std::exception&) {
      o.ok = false;
    }
    return o;
  });
  return cell;
}

json coords_json(const CellResult& cell) {
  json j = json::object();
  for (const auto& [name, value] : cell.coords) j[name] = value;
  return j;
}

json cell_json(const CellResult& cell) {
  json j;
  j["coords"] = coords_json(cell);
  if (!cell.mode.empty()) j["mode"] = cell.mode;
  j["trials"] = cell.trials;
  j["failures"] = cell.failures;
  j["successes"] = cell.successes;
  j["support_successes"] = cell.support_successes;
  j["space_successes"] = cell.space_successes;
  j["success_rate"] = cell.success_rate;
  j["support_rate"] = cell.support_rate;
  j["space_rate"] = cell.space_rate;
  j["mean_gap"] = cell.mean_gap;
  j["mean_iterations"] = cell.mean_iterations;
  j["mean_false_alarms"] = cell.mean_false_alarms;
  j["wall_seconds"] = cell.wall_seconds;
  j["seeds"] = cell.seeds;
  j["completed"] = cell.completed;
  return j;
}

json theory_row_json(const io::TheoryReport& rep) {
  json j;
  if (rep.stats) {
    j["n"] = rep.stats->n;
    j["mu"] = rep.stats->mu;
    j["epsilon"] = rep.stats->epsilon;
    j["rho"] = rep.stats->rho;
  }
  if (rep.range) {
    j["k_tilde"] = rep.range->k_tilde;
    j["feasible"] = rep.range->feasible;
    j["lambda_min"] = std::isfinite(rep.range->lambda_min) ? json(rep.range->lambda_min) : json("inf");
    j["lambda_max"] = rep.range->lambda_max;
  } else {
    j["k_tilde"] = 0;
    j["feasible"] = false;
  }
  return j;
}

json plan_json(const ExperimentPlan& plan) {
  json j;
  j["kind"] = "plan";
  j["family"] = family_name(plan.family);
  j["t"] = plan.t;
  j["p"] = plan.p;
  j["n"] = plan.n;
  j["w_kind"] = plan.w_kind;
  j["binary_row_ones"] = plan.binary_row_ones;
  j["binary_col_ones"] = plan.binary_col_ones;
  j["attack_magnitude"] = plan.attack_magnitude;
  j["w_scale"] = plan.w_scale;
  j["rank"] = plan.rank;
  j["support_size"] = plan.support_size;
  j["sigma"] = plan.sigma;
  j["keep_fraction"] = plan.keep_fraction;
  j["ranks"] = plan.ranks;
  j["support_sizes"] = plan.support_sizes;
  j["sigmas"] = plan.sigmas;
  j["keep_fractions"] = plan.keep_fractions;
  j["densities"] = plan.densities;
  j["ring_sizes"] = plan.ring_sizes;
  j["trials_per_cell"] = plan.trials_per_cell;
  j["base_seed"] = plan.base_seed;
  j["jobs"] = plan.jobs;
  j["lambda"] = plan.lambda;
  j["lambda1"] = plan.lambda1;
  j["lambda2"] = plan.lambda2;
  j["eps1"] = plan.eps1;
  j["eps2"] = plan.eps2;
  j["knobs"] = {{"rho", plan.knobs.rho},         {"alpha", plan.knobs.alpha},
                {"max_iters", plan.knobs.max_iters}, {"tol_abs", plan.knobs.tol_abs},
                {"tol_rel", plan.knobs.tol_rel},  {"adaptive_rho", plan.knobs.adaptive_rho}};
  j["psi_tilde"] = plan.psi_tilde;
  j["c"] = plan.c;
  j["rho_policy"] = plan.rho_policy;
  return j;
}

}  // namespace

std::string family_name(ExperimentFamily family) {
  switch (family) {
    case ExperimentFamily::PhaseGrid: return "phase_grid";
    case ExperimentFamily::NoiseSweep: return "noise_sweep";
    case ExperimentFamily::MaskSweep: return "mask_sweep";
    case ExperimentFamily::CombinedCompare: return "combined_compare";
    case ExperimentFamily::RingTheory: return "ring_theory";
  }
  throw InvalidSize("unknown experiment family");
}

ExperimentFamily family_from_name(const std::string& name) {
  if (name == "phase_grid" || name == "PhaseGrid") return ExperimentFamily::PhaseGrid;
  if (name == "noise_sweep" || name == "NoiseSweep") return ExperimentFamily::NoiseSweep;
  if (name == "mask_sweep" || name == "MaskSweep") return ExperimentFamily::MaskSweep;
  if (name == "combined_compare" || name == "CombinedCompare")
    return ExperimentFamily::CombinedCompare;
  if (name == "ring_theory" || name == "RingTheory") return ExperimentFamily::RingTheory;
  throw InvalidSize("unknown experiment family '" + name + "'");
}

double CellResult::coord(const std::string& name) const {
  for (const auto& [key, value] : coords)
    if (key == name) return value;
  throw InvalidSize("cell has no coordinate '" + name + "'");
}

ExperimentPlan default_plan(ExperimentFamily family) {
  ExperimentPlan plan;
  plan.family = family;
  switch (family) {
    case ExperimentFamily::PhaseGrid:
      plan.ranks = {1, 2, 3, 4, 5, 6, 7, 8};
      plan.support_sizes = {0, 1, 2, 3, 4, 5, 6};
      break;
    case ExperimentFamily::NoiseSweep:
      plan.rank = 3;
      plan.support_size = 3;
      plan.sigmas = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
      break;
    case ExperimentFamily::MaskSweep:
      plan.ranks = {1, 2, 3, 4};
      plan.support_sizes = {0, 1, 2, 3};
      plan.keep_fractions = {1.0, 0.8, 0.5, 0.2, 0.01};
      break;
    case ExperimentFamily::CombinedCompare:
      plan.n = 20;
      plan.w_kind = "binary";
      plan.rank = 2;
      plan.support_size = 2;
      plan.lambda = 1.0;
      plan.lambda1 = 1.0;
      plan.lambda2 = 0.1;
      plan.densities = {0.0, 0.02, 0.05, 0.1};
      break;
    case ExperimentFamily::RingTheory:
      plan.rank = 1;
      plan.ring_sizes = {8, 16, 24, 32, 40, 44, 48, 52, 64, 96};
      break;
  }
  return plan;
}

ExperimentReport run_phase_grid(const ExperimentPlan& plan) {
  require_family(plan, ExperimentFamily::PhaseGrid);
  ExperimentPlan filled = plan;
  if (filled.ranks.empty()) filled.ranks = default_plan(plan.family).ranks;
  if (filled.support_sizes.empty()) filled.support_sizes = default_plan(plan.family).support_sizes;
  ExperimentReport report = report_shell(filled);
  const double start = now_seconds();
  for (int r : filled.ranks)
    for (int k : filled.support_sizes) report.cells.push_back(grid_cell(filled, r, k, filled.keep_fraction));
  finish(report, start);
  return report;
}

ExperimentReport run_mask_sweep(const ExperimentPlan& plan) {
  require_family(plan, ExperimentFamily::MaskSweep);
  ExperimentPlan filled = plan;
  const ExperimentPlan defaults = default_plan(plan.family);
  if (filled.ranks.empty()) filled.ranks = defaults.ranks;
  if (filled.support_sizes.empty()) filled.support_sizes = defaults.support_sizes;
  if (filled.keep_fractions.empty()) filled.keep_fractions = defaults.keep_fractions;
  ExperimentReport report = report_shell(filled);
  const double start = now_seconds();
  for (double keep : filled.keep_fractions)
    for (int r : filled.ranks)
      for (int k : filled.support_sizes) report.cells.push_back(grid_cell(filled, r, k, keep));
  finish(report, start);
  return report;
}

ExperimentReport run_noise_sweep(const ExperimentPlan& plan) {
  require_family(plan, ExperimentFamily::NoiseSweep);
  ExperimentPlan filled = plan;
  if (filled.sigmas.empty()) filled.sigmas = default_plan(plan.family).sigmas;
  ExperimentReport report = report_shell(filled);
  const double start = now_seconds();
  for (std::size_t si = 0; si < filled.sigmas.size(); ++si) {
    const double sigma = filled.sigmas[si];
    CellResult cell;
    cell.coords = {{"sigma", sigma}};
    for (int i = 0; i < filled.trials_per_cell; ++i)
      cell.seeds.push_back(
          Rng::derive(filled.base_seed, kTagNoise, si, static_cast<std::uint64_t>(i + 1)));
    run_trials(cell, filled.trials_per_cell, filled.jobs, [&](int i) {
      TrialOutcome o;
      try {
        ScenarioConfig cfg = base_config(filled);
        cfg.sigma = sigma;
        cfg.seed = cell.seeds[static_cast<std::size_t>(i)];
        const AttackScenario scenario = generate(cfg);
        ProblemSpec spec = to_problem(scenario, filled.lambda);
        spec.knobs = filled.knobs;
        const DecompositionResult result = solve(spec);
        o = score_trial(scenario, result, filled, Criterion::Support);
      } catch (const std::exception&) {
        o.ok = false;
      }
      return o;
    });
    report.cells.push_back(std::move(cell));
  }
  finish(report, start);
  return report;
}

ExperimentReport run_combined_compare(const ExperimentPlan& plan) {
  require_family(plan, ExperimentFamily::CombinedCompare);
  ExperimentPlan filled = plan;
  if (filled.densities.empty()) filled.densities = default_plan(plan.family).densities;
  ExperimentReport report = report_shell(filled);
  const double start = now_seconds();
  const std::vector<std::string> modes = {"basic", "scattered_only", "combined"};
  for (std::size_t di = 0; di < filled.densities.size(); ++di) {
    const double density = filled.densities[di];
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < filled.trials_per_cell; ++i)
      seeds.push_back(Rng::derive(filled.base_seed, kTagCompare, di, static_cast<std::uint64_t>(i + 1)));
    for (const std::string& mode : modes) {
      CellResult cell;
      cell.coords = {{"density", density}};
      cell.mode = mode;
      cell.seeds = seeds;
      run_trials(cell, filled.trials_per_cell, filled.jobs, [&](int i) {
        TrialOutcome o;
        try {
          ScenarioConfig cfg = base_config(filled);
          cfg.scatter_density = density;
          cfg.seed = seeds[static_cast<std::size_t>(i)];
          const AttackScenario scenario = generate(cfg);
          ProblemSpec spec =
              mode == "basic"
                  ? to_problem(scenario, filled.lambda1, SolveMode::Basic)
                  : to_problem(scenario, filled.lambda1, SolveMode::Combined,
                               mode == "scattered_only" ? 1e9 : filled.lambda1, filled.lambda2);
          spec.knobs = filled.knobs;
          const DecompositionResult result = solve(spec);
          o = score_trial(scenario, result, filled, Criterion::Space);
        } catch (const std::exception&) {
          o.ok = false;
        }
        return o;
      });
      report.cells.push_back(std::move(cell));
    }
  }
  finish(report, start);
  return report;
}

ExperimentReport run_ring_theory(const ExperimentPlan& plan) {
  require_family(plan, ExperimentFamily::RingTheory);
  ExperimentPlan filled = plan;
  if (filled.ring_sizes.empty()) filled.ring_sizes = default_plan(plan.family).ring_sizes;
  if (filled.rho_policy != "flat" && filled.rho_policy != "gaussian")
    throw InvalidSize("rho_policy must be flat or gaussian");
  const int r = filled.rank;
  if (r < 1) throw InvalidSize("ring study needs rank at least 1");
  ExperimentReport report = report_shell(filled);
  const double start = now_seconds();
  for (int n : filled.ring_sizes) {
    if (n < 4 || n % 2 != 0) throw InvalidSize("ring sizes must be even and at least 4");
    const TransformMatrix tm = build_ring_network(n);
    const Eigen::Index p = tm.w_bar.rows();
    const int t = std::max(filled.t, 2 * r);
    Rng rng(Rng::derive(filled.base_seed, kTagRing, static_cast<std::uint64_t>(n)));
    CMat v_bar(p, r);
    if (filled.rho_policy == "flat") {
      for (int l = 0; l < r; ++l)
        for (Eigen::Index j = 0; j < p; ++j) {
          const double angle =
              2.0 * std::numbers::pi * static_cast<double>(j) * static_cast<double>(l + 1) /
              static_cast<double>(p);
          v_bar(j, l) = Complex(std::cos(angle), std::sin(angle)) / std::sqrt(static_cast<double>(p));
        }
    } else {
      CMat g(p, r);
      for (int l = 0; l < r; ++l)
        for (Eigen::Index j = 0; j < p; ++j) g(j, l) = Complex(rng.gaussian(), rng.gaussian());
      const Eigen::HouseholderQR<CMat> qr(g);
      v_bar = qr.householderQ() * CMat::Identity(p, r);
    }
    CMat a(t, r);
    for (int l = 0; l < r; ++l)
      for (int i = 0; i < t; ++i) a(i, l) = Complex(rng.gaussian(), rng.gaussian());
    const CMat l_bar = a * v_bar.adjoint();

    io::TheoryReport row;
    IncoherenceStats probe = compute_incoherence(l_bar, tm.w, {1});
    const int k_tilde = static_cast<int>(std::floor(
        static_cast<double>(n) / (48.0 * probe.rho * static_cast<double>(r)) + 1e-9));
    if (k_tilde >= 1) {
      IncoherenceStats stats = compute_incoherence(l_bar, tm.w, {k_tilde});
      row.range = lambda_range(stats, filled.psi_tilde, filled.c, k_tilde, false);
      row.stats = std::move(stats);
    } else {
      row.stats = std::move(probe);
    }
    report.theory.push_back(std::move(row));
  }
  finish(report, start);
  return report;
}

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  switch (plan.family) {
    case ExperimentFamily::PhaseGrid: return run_phase_grid(plan);
    case ExperimentFamily::NoiseSweep: return run_noise_sweep(plan);
    case ExperimentFamily::MaskSweep: return run_mask_sweep(plan);
    case ExperimentFamily::CombinedCompare: return run_combined_compare(plan);
    case ExperimentFamily::RingTheory: return run_ring_theory(plan);
  }
  throw InvalidSize("unknown experiment family");
}

ExperimentPlan read_plan(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("cannot parse " + file.string() + ": " + e.what());
  }
  if (!j.contains("kind") || j.at("kind") != "plan")
    throw Error(file.string() + " is not a plan file");
  try {
    ExperimentPlan plan = default_plan(family_from_name(j.at("family").get<std::string>()));
    plan.t = j.value("t", plan.t);
    plan.p = j.value("p", plan.p);
    plan.n = j.value("n", plan.n);
    plan.w_kind = j.value("w_kind", plan.w_kind);
    plan.binary_row_ones = j.value("binary_row_ones", plan.binary_row_ones);
    plan.binary_col_ones = j.value("binary_col_ones", plan.binary_col_ones);
    plan.attack_magnitude = j.value("attack_magnitude", plan.attack_magnitude);
    plan.w_scale = j.value("w_scale", plan.w_scale);
    plan.rank = j.value("rank", plan.rank);
    plan.support_size = j.value("support_size", plan.support_size);
    plan.sigma = j.value("sigma", plan.sigma);
    plan.keep_fraction = j.value("keep_fraction", plan.keep_fraction);
    plan.ranks = j.value("ranks", plan.ranks);
    plan.support_sizes = j.value("support_sizes", plan.support_sizes);
    plan.sigmas = j.value("sigmas", plan.sigmas);
    plan.keep_fractions = j.value("keep_fractions", plan.keep_fractions);
    plan.densities = j.value("densities", plan.densities);
    plan.ring_sizes = j.value("ring_sizes", plan.ring_sizes);
    plan.trials_per_cell = j.value("trials_per_cell", plan.trials_per_cell);
    plan.base_seed = j.value("base_seed", plan.base_seed);
    plan.jobs = j.value("jobs", plan.jobs);
    plan.lambda = j.value("lambda", plan.lambda);
    plan.lambda1 = j.value("lambda1", plan.lambda1);
    plan.lambda2 = j.value("lambda2", plan.lambda2);
    plan.eps1 = j.value("eps1", plan.eps1);
    plan.eps2 = j.value("eps2", plan.eps2);
    if (j.contains("knobs")) {
      const json& k = j.at("knobs");
      plan.knobs.rho = k.value("rho", plan.knobs.rho);
      plan.knobs.alpha = k.value("alpha", plan.knobs.alpha);
      plan.knobs.max_iters = k.value("max_iters", plan.knobs.max_iters);
      plan.knobs.tol_abs = k.value("tol_abs", plan.knobs.tol_abs);
      plan.knobs.tol_rel = k.value("tol_rel", plan.knobs.tol_rel);
      plan.knobs.adaptive_rho = k.value("adaptive_rho", plan.knobs.adaptive_rho);
    }
    plan.psi_tilde = j.value("psi_tilde", plan.psi_tilde);
    plan.c = j.value("c", plan.c);
    plan.rho_policy = j.value("rho_policy", plan.rho_policy);
    return plan;
  } catch (const json::exception& e) {
    throw Error("cannot read plan " + file.string() + ": " + e.what());
  }
}

void write_plan(const std::filesystem::path& file, const ExperimentPlan& plan) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out << plan_json(plan).dump(2) << '\n';
  if (!out.good()) throw Error("write failed for " + file.string());
}

void write_experiment_report(const std::filesystem::path& dir, const ExperimentPlan& plan,
                             const ExperimentReport& report) {
  std::filesystem::create_directories(dir);

  json jr;
  jr["kind"] = "experiment_report";
  jr["family"] = family_name(report.family);
  jr["base_seed"] = report.base_seed;
  jr["trials_per_cell"] = report.trials_per_cell;
  jr["all_cells_completed"] = report.all_cells_completed;
  jr["wall_seconds"] = report.wall_seconds;
  jr["environment"] = report.environment;
  json cells = json::array();
  for (const CellResult& cell : report.cells) cells.push_back(cell_json(cell));
  jr["cells"] = std::move(cells);
  json theory = json::array();
  for (const io::TheoryReport& row : report.theory) theory.push_back(theory_row_json(row));
  jr["theory"] = std::move(theory);
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw Error("cannot open " + (dir / "report.json").string() + " for writing");
    out << jr.dump(2) << '\n';
    if (!out.good()) throw Error("write failed for " + (dir / "report.json").string());
  }

  std::ofstream grid(dir / "grid.csv", std::ios::binary);
  if (!grid) throw Error("cannot open " + (dir / "grid.csv").string() + " for writing");
  const auto rate = [&](auto pred) {
    for (const CellResult& cell : report.cells)
      if (pred(cell)) return io::format_double(cell.success_rate);
    return std::string("");
  };
  switch (report.family) {
    case ExperimentFamily::PhaseGrid:
    case ExperimentFamily::MaskSweep: {
      std::vector<double> keeps;
      std::vector<int> rs, ks;
      for (const CellResult& cell : report.cells) {
        if (report.family == ExperimentFamily::MaskSweep) {
          const double keep = cell.coord("keep");
          if (std::find(keeps.begin(), keeps.end(), keep) == keeps.end()) keeps.push_back(keep);
        }
        const int r = static_cast<int>(cell.coord("r"));
        const int k = static_cast<int>(cell.coord("k"));
        if (std::find(rs.begin(), rs.end(), r) == rs.end()) rs.push_back(r);
        if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
      }
      if (report.family == ExperimentFamily::PhaseGrid) {
        grid << "r";
        for (int k : ks) grid << ",k_" << k;
        grid << '\n';
        for (int r : rs) {
          grid << r;
          for (int k : ks)
            grid << ','
                 << rate([&](const CellResult& cell) {
                      return cell.coord("r") == r && cell.coord("k") == k;
                    });
          grid << '\n';
        }
      } else {
        grid << "keep,r";
        for (int k : ks) grid << ",k_" << k;
        grid << '\n';
        for (double keep : keeps)
          for (int r : rs) {
            grid << io::format_double(keep) << ',' << r;
            for (int k : ks)
              grid << ','
                   << rate([&](const CellResult& cell) {
                        return cell.coord("keep") == keep && cell.coord("r") == r &&
                               cell.coord("k") == k;
                      });
            grid << '\n';
          }
      }
      break;
    }
    case ExperimentFamily::NoiseSweep: {
      grid << "sigma,success_rate,support_rate,mean_gap\n";
      for (const CellResult& cell : report.cells)
        grid << io::format_double(cell.coord("sigma")) << ','
             << io::format_double(cell.success_rate) << ','
             << io::format_double(cell.support_rate) << ',' << io::format_double(cell.mean_gap)
             << '\n';
      break;
    }
    case ExperimentFamily::CombinedCompare: {
      std::vector<double> densities;
      std::vector<std::string> modes;
      for (const CellResult& cell : report.cells) {
        const double d = cell.coord("density");
        if (std::find(densities.begin(), densities.end(), d) == densities.end())
          densities.push_back(d);
        if (std::find(modes.begin(), modes.end(), cell.mode) == modes.end())
          modes.push_back(cell.mode);
      }
      grid << "mode";
      for (double d : densities) grid << ",density_" << io::format_double(d);
      grid << '\n';
      for (const std::string& mode : modes) {
        grid << mode;
        for (double d : densities)
          grid << ','
               << rate([&](const CellResult& cell) {
                    return cell.mode == mode && cell.coord("density") == d;
                  });
        grid << '\n';
      }
      break;
    }
    case ExperimentFamily::RingTheory: {
      grid << "n,mu,epsilon,rho,k_tilde,feasible,lambda_min,lambda_max\n";
      for (const io::TheoryReport& row : report.theory) {
        const json r = theory_row_json(row);
        grid << r.value("n", 0) << ',' << io::format_double(r.value("mu", 0.0)) << ','
             << io::format_double(r.value("epsilon", 0.0)) << ','
             << io::format_double(r.value("rho", 0.0)) << ',' << r.value("k_tilde", 0) << ','
             << (r.value("feasible", false) ? 1 : 0) << ',';
        if (row.range)
          grid << (std::isfinite(row.range->lambda_min)
                       ? io::format_double(row.range->lambda_min)
                       : std::string("inf"))
               << ',' << io::format_double(row.range->lambda_max);
        else
          grid << ',';
        grid << '\n';
      }
      break;
    }
  }
  if (!grid.good()) throw Error("write failed for " + (dir / "grid.csv").string());
  grid.close();

  std::ofstream curves(dir / "curves.csv", std::ios::binary);
  if (!curves) throw Error("cannot open " + (dir / "curves.csv").string() + " for writing");
  if (report.family == ExperimentFamily::RingTheory) {
    curves << "n,mu,epsilon,rho,k_tilde,feasible,lambda_min,lambda_max,lambda_min_noisy,"
              "lambda_max_noisy\n";
    for (const io::TheoryReport& row : report.theory) {
      const int n = row.stats ? row.stats->n : 0;
      curves << n << ',' << io::format_double(row.stats ? row.stats->mu : 0.0) << ','
             << io::format_double(row.stats ? row.stats->epsilon : 0.0) << ','
             << io::format_double(row.stats ? row.stats->rho : 0.0) << ',';
      if (row.range) {
        curves << row.range->k_tilde << ',' << (row.range->feasible ? 1 : 0) << ','
               << (std::isfinite(row.range->lambda_min) ? io::format_double(row.range->lambda_min)
                                                        : std::string("inf"))
               << ',' << io::format_double(row.range->lambda_max) << ','
               << (std::isfinite(row.range->lambda_min_noisy)
                       ? io::format_double(row.range->lambda_min_noisy)
                       : std::string("inf"))
               << ',' << io::format_double(row.range->lambda_max_noisy);
      } else {
        curves << "0,0,,,,";
      }
      curves << '\n';
    }
  } else if (!report.cells.empty()) {
    for (const auto& [name, value] : report.cells.front().coords) curves << name << ',';
    curves << "mode,trials,failures,success_rate,support_rate,space_rate,mean_gap,"
              "mean_iterations,mean_false_alarms\n";
    for (const CellResult& cell : report.cells) {
      for (const auto& [name, value] : cell.coords) curves << io::format_double(value) << ',';
      curves << cell.mode << ',' << cell.trials << ',' << cell.failures << ','
             << io::format_double(cell.success_rate) << ',' << io::format_double(cell.support_rate)
             << ',' << io::format_double(cell.space_rate) << ',' << io::format_double(cell.mean_gap)
             << ',' << io::format_double(cell.mean_iterations) << ','
             << io::format_double(cell.mean_false_alarms) << '\n';
    }
  }
  if (!curves.good()) throw Error("write failed for " + (dir / "curves.csv").string());
  curves.close();

  json jm;
  jm["kind"] = "manifest";
  jm["family"] = family_name(report.family);
  jm["base_seed"] = report.base_seed;
  jm["trials_per_cell"] = report.trials_per_cell;
  jm["environment"] = report.environment;
  jm["plan"] = plan_json(plan);
  json seed_rows = json::array();
  for (const CellResult& cell : report.cells) {
    json row;
    row["coords"] = coords_json(cell);
    if (!cell.mode.empty()) row["mode"] = cell.mode;
    row["seeds"] = cell.seeds;
    seed_rows.push_back(std::move(row));
  }
  jm["seeds"] = std::move(seed_rows);
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot open " + (dir / "manifest.json").string() + " for writing");
    out << jm.dump(2) << '\n';
    if (!out.good()) throw Error("write failed for " + (dir / "manifest.json").string());
  }
}

}  // namespace lrcs
