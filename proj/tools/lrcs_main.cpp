#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrcs/detect.hpp"
#include "lrcs/errors.hpp"
#include "lrcs/experiment.hpp"
#include "lrcs/io.hpp"
#include "lrcs/sim.hpp"
#include "lrcs/solver.hpp"
#include "lrcs/theory.hpp"

namespace fs = std::filesystem;
using namespace lrcs;

namespace {

/// "3", "1,2,5", and "1..4" all describe k lists for the theory commands.
std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos) {
    const int lo = std::stoi(text.substr(0, range_pos));
    const int hi = std::stoi(text.substr(range_pos + 2));
    if (lo < 1 || hi < lo) throw InvalidSize("bad k range '" + text + "'");
    for (int k = lo; k <= hi; ++k) ks.push_back(k);
    return ks;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) ks.push_back(std::stoi(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (ks.empty()) throw InvalidSize("empty k list");
  return ks;
}

CMat unit_columns(const CMat& w) {
  CMat out = w;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 0) out.col(j) /= norm;
  }
  return out;
}

void add_knob_options(CLI::App* cmd, SolverKnobs& knobs) {
  cmd->add_option("--max-iters", knobs.max_iters, "Iteration cap");
  cmd->add_option("--tol-abs", knobs.tol_abs, "Absolute stopping tolerance");
  cmd->add_option("--tol-rel", knobs.tol_rel, "Relative stopping tolerance");
  cmd->add_option("--rho", knobs.rho, "Penalty parameter");
  cmd->add_option("--alpha", knobs.alpha, "Over-relaxation factor");
  cmd->add_flag_callback("--no-adaptive", [&knobs] { knobs.adaptive_rho = false; },
                         "Freeze the penalty parameter");
}

int run_gen(const ScenarioConfig& config, const std::string& out_dir, bool manifest_only) {
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  const AttackScenario scenario = generate(config);
  io::write_scenario(dir / "scenario.json", config);
  if (!manifest_only) {
    io::write_matrix_csv(dir / "M.csv", scenario.M);
    io::write_matrix_csv(dir / "L_bar.csv", scenario.L_bar);
    io::write_matrix_csv(dir / "C_bar.csv", scenario.C_bar);
    io::write_matrix_csv(dir / "W.csv", scenario.W);
    if (config.scatter_density > 0.0) io::write_matrix_csv(dir / "S_bar.csv", scenario.S_bar);
    if (config.keep_fraction < 1.0) io::write_mask_csv(dir / "mask.csv", scenario.omega);
  }
  std::string buses;
  for (int b : scenario.support) buses += (buses.empty() ? "" : ",") + std::to_string(b + 1);
  std::printf("scenario %s: %dx%d, n=%d, rank=%d, attacked buses [%s], eta=%g, w_scale=%g\n",
              (dir / "scenario.json").c_str(), config.t, config.p, config.n, config.rank,
              buses.c_str(), scenario.eta, scenario.w_scale);
  return 0;
}

int run_solve(const std::string& input, const std::string& out, double lambda,
              const std::string& mode, double lambda1, double lambda2, const std::string& eta,
              const SolverKnobs& knobs) {
  const AttackScenario scenario = io::load_scenario(input);
  const SolveMode solve_mode = mode == "combined" ? SolveMode::Combined : SolveMode::Basic;
  ProblemSpec spec = to_problem(scenario, lambda, solve_mode, lambda1, lambda2);
  if (eta != "auto") spec.eta = std::stod(eta);
  spec.knobs = knobs;
  const DecompositionResult result = solve(spec);
  io::write_result(out, result);
  std::printf("%s: %d iterations, converged=%d, constraint violation %.3e\n", out.c_str(),
              result.iterations, result.converged ? 1 : 0, result.constraint_violation);
  return 0;
}

int run_theory_stats(const std::string& l_file, const std::string& w_file, const std::string& ks,
                     const std::string& out) {
  const CMat l_bar = io::read_matrix_csv(l_file);
  const CMat w = unit_columns(io::read_matrix_csv(w_file));
  io::TheoryReport report;
  report.stats = compute_incoherence(l_bar, w, parse_k_list(ks));
  io::write_theory_report(out, report);
  std::printf("%s: epsilon=%.6g mu=%.6g rho=%.6g r=%d\n", out.c_str(), report.stats->epsilon,
              report.stats->mu, report.stats->rho, report.stats->r);
  return 0;
}

int run_theory_lambda_range(const std::string& l_file, const std::string& w_file, double psi,
                            double c, int k, bool noisy, const std::string& out) {
  const CMat l_bar = io::read_matrix_csv(l_file);
  const CMat w = unit_columns(io::read_matrix_csv(w_file));
  io::TheoryReport report;
  report.noisy = noisy;
  report.stats = compute_incoherence(l_bar, w, {k});
  report.range = lambda_range(*report.stats, psi, c, k, noisy);
  io::write_theory_report(out, report);
  const double lo = noisy ? report.range->lambda_min_noisy : report.range->lambda_min;
  const double hi = noisy ? report.range->lambda_max_noisy : report.range->lambda_max;
  std::printf("%s: k=%d feasible=%d lambda in [%.6g, %.6g]\n", out.c_str(), k,
              report.range->feasible ? 1 : 0, lo, hi);
  return 0;
}

int run_theory_certify(const std::string& scenario_file, double lambda, bool noisy,
                       const std::string& out) {
  const AttackScenario scenario = io::load_scenario(scenario_file);
  const CMat w_unit = scenario.W / scenario.w_scale;
  const CMat c_bar = scenario.C_bar * scenario.w_scale;
  io::TheoryReport report;
  report.noisy = noisy;
  CertificateReport cert = build_certificate(scenario.L_bar, c_bar, w_unit, lambda);
  report.verdict = verify_conditions(cert, noisy);
  const int k = static_cast<int>(cert.support.size());
  report.stats = compute_incoherence(scenario.L_bar, w_unit, {std::max(k, 1)});
  report.certificate = std::move(cert);
  io::write_theory_report(out, report);
  std::printf("%s: conditions %s (a=%d b=%d c=%d d=%d), margins [%.3g, %.3g, %.3g, %.3g]\n",
              out.c_str(), report.verdict->all ? "hold" : "fail", report.verdict->a,
              report.verdict->b, report.verdict->c, report.verdict->d, report.verdict->margin_a,
              report.verdict->margin_b, report.verdict->margin_c, report.verdict->margin_d);
  return 0;
}

int run_detect(const std::string& scenario_file, const std::string& result_file, double eps1,
               double eps2, const std::string& out) {
  const AttackScenario scenario = io::load_scenario(scenario_file);
  const DecompositionResult result = io::read_result(result_file);
  const DetectionOutcome outcome = score(scenario, result, eps1, eps2);
  io::write_outcome(out, outcome);
  std::string buses;
  for (int b : outcome.estimate.buses) buses += (buses.empty() ? "" : ",") + std::to_string(b + 1);
  std::printf("%s: success=%d support_exact=%d gap=%.3e buses [%s] false_alarms=%d\n", out.c_str(),
              outcome.success ? 1 : 0, outcome.support_exact ? 1 : 0, outcome.subspace_gap,
              buses.c_str(), outcome.false_alarms);
  return 0;
}

int run_expgrid(const std::string& plan_file, const std::string& out_dir, int trials, int jobs) {
  ExperimentPlan plan = read_plan(plan_file);
  if (trials > 0) plan.trials_per_cell = trials;
  if (jobs > 0) plan.jobs = jobs;
  std::fprintf(stderr, "running %s (trials per cell %d, jobs %d)\n",
               family_name(plan.family).c_str(), plan.trials_per_cell, plan.jobs);
  const ExperimentReport report = run_experiment(plan);
  write_experiment_report(out_dir, plan, report);
  for (const CellResult& cell : report.cells) {
    std::string coords;
    for (const auto& [name, value] : cell.coords)
      coords += (coords.empty() ? "" : " ") + name + "=" + io::format_double(value);
    std::printf("cell %s%s%s: success %.2f support %.2f gap %.3e failures %d\n", coords.c_str(),
                cell.mode.empty() ? "" : " mode=", cell.mode.c_str(), cell.success_rate,
                cell.support_rate, cell.mean_gap, cell.failures);
  }
  for (const io::TheoryReport& row : report.theory) {
    if (!row.stats) continue;
    std::printf("ring n=%d rho=%.4f mu=%.5f k_tilde=%d feasible=%d\n", row.stats->n,
                row.stats->rho, row.stats->mu, row.range ? row.range->k_tilde : 0,
                row.range && row.range->feasible ? 1 : 0);
  }
  std::printf("report written to %s (wall %.1fs, all cells completed: %s)\n", out_dir.c_str(),
              report.wall_seconds, report.all_cells_completed ? "yes" : "no");
  return report.all_cells_completed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank plus transformed column-sparse decomposition toolkit"};
  app.require_subcommand(1);

  // attacksim gen
  auto* attacksim = app.add_subcommand("attacksim", "Synthetic scenario generation");
  attacksim->require_subcommand(1);
  auto* gen = attacksim->add_subcommand("gen", "Generate a scenario and write it to a directory");
  ScenarioConfig gen_config;
  std::string gen_out = "scenario_out";
  std::vector<int> gen_buses;
  bool gen_manifest_only = false;
  gen->add_option("--t", gen_config.t, "Time samples");
  gen->add_option("--p", gen_config.p, "Channels");
  gen->add_option("--n", gen_config.n, "Buses");
  gen->add_option("--r", gen_config.rank, "Rank of the clean matrix");
  gen->add_option("--support", gen_config.support_size, "Number of attacked buses");
  gen->add_option("--buses", gen_buses, "Explicit attacked buses (1-based)");
  gen->add_option("--sigma", gen_config.sigma, "Noise level");
  gen->add_option("--keep", gen_config.keep_fraction, "Observed fraction of entries");
  gen->add_option("--seed", gen_config.seed, "Generator seed");
  gen->add_option("--w-kind", gen_config.w_kind, "Coefficient family: gaussian, binary, ring");
  gen->add_option("--row-ones", gen_config.binary_row_ones, "Ones per row for binary W");
  gen->add_option("--col-ones", gen_config.binary_col_ones, "Ones per column for binary W");
  gen->add_option("--magnitude", gen_config.attack_magnitude, "Attack magnitude");
  gen->add_option("--density", gen_config.scatter_density, "Scattered attack density");
  gen->add_option("--w-scale", gen_config.w_scale, "Column norm handed to the solver (0 = auto)");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_flag("--manifest-only", gen_manifest_only, "Skip the materialized CSV matrices");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Decompose a scenario's measurements");
  std::string solve_input, solve_out = "result.json", solve_mode = "basic", solve_eta = "auto";
  double solve_lambda = 0.95, solve_lambda1 = 1.0, solve_lambda2 = 0.1;
  SolverKnobs solve_knobs;
  solve_cmd->add_option("--input", solve_input, "Scenario manifest")->required();
  solve_cmd->add_option("--lambda", solve_lambda, "Column-group penalty weight");
  solve_cmd->add_option("--mode", solve_mode, "basic or combined")
      ->check(CLI::IsMember({"basic", "combined"}));
  solve_cmd->add_option("--lambda1", solve_lambda1, "Column-group weight in combined mode");
  solve_cmd->add_option("--lambda2", solve_lambda2, "Entrywise weight in combined mode");
  solve_cmd->add_option("--eta", solve_eta, "Noise budget: auto or a value");
  solve_cmd->add_option("--out", solve_out, "Result file");
  add_knob_options(solve_cmd, solve_knobs);

  // theory stats | lambda-range | certify
  auto* theory = app.add_subcommand("theory", "Incoherence statistics and recovery guarantees");
  theory->require_subcommand(1);
  auto* stats_cmd = theory->add_subcommand("stats", "Incoherence statistics of (L, W)");
  std::string stats_l, stats_w, stats_k = "1", stats_out = "theory_report.json";
  stats_cmd->add_option("--L", stats_l, "Clean matrix CSV")->required();
  stats_cmd->add_option("--W", stats_w, "Coefficient matrix CSV (columns get normalized)")
      ->required();
  stats_cmd->add_option("--k", stats_k, "Support sizes: K, a..b, or a,b,c");
  stats_cmd->add_option("--out", stats_out, "Report file");

  auto* range_cmd = theory->add_subcommand("lambda-range", "Feasible penalty window");
  std::string range_l, range_w, range_out = "theory_report.json";
  double range_psi = 0.125, range_c = 0.25;
  int range_k = 3;
  bool range_noisy = false;
  range_cmd->add_option("--L", range_l, "Clean matrix CSV")->required();
  range_cmd->add_option("--W", range_w, "Coefficient matrix CSV (columns get normalized)")
      ->required();
  range_cmd->add_option("--psi", range_psi, "Series budget psi tilde");
  range_cmd->add_option("--c", range_c, "Incoherence budget c");
  range_cmd->add_option("--k", range_k, "Attack support size bound");
  range_cmd->add_flag("--noisy", range_noisy, "Use the noisy window");
  range_cmd->add_option("--out", range_out, "Report file");

  auto* certify_cmd = theory->add_subcommand("certify", "Build and check a dual certificate");
  std::string certify_scenario, certify_out = "theory_report.json";
  double certify_lambda = 0.95;
  bool certify_noisy = false;
  certify_cmd->add_option("--scenario", certify_scenario, "Scenario manifest")->required();
  certify_cmd->add_option("--lambda", certify_lambda, "Penalty weight to certify");
  certify_cmd->add_flag("--noisy", certify_noisy, "Check the noisy thresholds");
  certify_cmd->add_option("--out", certify_out, "Report file");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "Score a decomposition against ground truth");
  std::string detect_scenario, detect_result, detect_out = "outcome.json";
  double detect_eps1 = 0.002, detect_eps2 = 0.01;
  detect_cmd->add_option("--scenario", detect_scenario, "Scenario manifest")->required();
  detect_cmd->add_option("--result", detect_result, "Result file")->required();
  detect_cmd->add_option("--eps1", detect_eps1, "Column-norm threshold");
  detect_cmd->add_option("--eps2", detect_eps2, "Subspace-gap threshold");
  detect_cmd->add_option("--out", detect_out, "Outcome file");

  // expgrid run
  auto* expgrid = app.add_subcommand("expgrid", "Experiment grids and sweeps");
  expgrid->require_subcommand(1);
  auto* run_cmd = expgrid->add_subcommand("run", "Run a plan and emit its report");
  std::string run_plan, run_out = "experiment_out";
  int run_trials = 0, run_jobs = 0;
  run_cmd->add_option("plan", run_plan, "Plan JSON file")->required();
  run_cmd->add_option("--out", run_out, "Output directory");
  run_cmd->add_option("--trials", run_trials, "Override trials per cell");
  run_cmd->add_option("--jobs", run_jobs, "Worker threads per cell");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      for (int b : gen_buses) gen_config.support.push_back(b - 1);
      return run_gen(gen_config, gen_out, gen_manifest_only);
    }
    if (solve_cmd->parsed())
      return run_solve(solve_input, solve_out, solve_lambda, solve_mode, solve_lambda1,
                       solve_lambda2, solve_eta, solve_knobs);
    if (stats_cmd->parsed()) return run_theory_stats(stats_l, stats_w, stats_k, stats_out);
    if (range_cmd->parsed())
      return run_theory_lambda_range(range_l, range_w, range_psi, range_c, range_k, range_noisy,
                                     range_out);
    if (certify_cmd->parsed())
      return run_theory_certify(certify_scenario, certify_lambda, certify_noisy, certify_out);
    if (detect_cmd->parsed())
      return run_detect(detect_scenario, detect_result, detect_eps1, detect_eps2, detect_out);
    if (run_cmd->parsed()) return run_expgrid(run_plan, run_out, run_trials, run_jobs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
