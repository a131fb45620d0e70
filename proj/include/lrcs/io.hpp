#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "lrcs/detect.hpp"
#include "lrcs/grid.hpp"
#include "lrcs/sim.hpp"
#include "lrcs/solver.hpp"
#include "lrcs/theory.hpp"
#include "lrcs/types.hpp"

namespace lrcs::io {

/// Complex matrices travel as CSV with a header row naming two real columns
/// per logical column: re_1,im_1,...,re_p,im_p (1-based). Values are written
/// in shortest round-trip form, so write followed by read reproduces every
/// entry bit for bit. Malformed cells, ragged rows, and headers that do not
/// follow the re/im pairing raise Error (ShapeMismatch for arity problems).
void write_matrix_csv(const std::filesystem::path& file, const CMat& m);
CMat read_matrix_csv(const std::filesystem::path& file);

/// Observation masks use the same layout with a col_<j> header and 0/1 cells.
void write_mask_csv(const std::filesystem::path& file, const Mask& mask);
Mask read_mask_csv(const std::filesystem::path& file);

/// Topology files hold n_buses, lines as {i, j, z_re, z_im, y_re, y_im}, and
/// channels as {kind: "V", bus} or {kind: "I", from, to}. Bus numbers are
/// 1-based in the file and shifted to 0-based on read.
void write_topology(const std::filesystem::path& file, const GridTopology& topo);
GridTopology read_topology(const std::filesystem::path& file);

/// A scenario file is a manifest: the generator config plus its seed, not the
/// matrices. Loading regenerates the scenario, which reproduces the original
/// bit for bit. Support entries are 1-based in the file.
void write_scenario(const std::filesystem::path& file, const ScenarioConfig& config);
ScenarioConfig read_scenario_config(const std::filesystem::path& file);
AttackScenario load_scenario(const std::filesystem::path& file);

/// Result files pair a JSON summary (iterations, converged flag, constraint
/// violation, residual and objective histories) with CSV sidecars for the
/// recovered matrices, written next to the JSON as <stem>_L.csv, <stem>_C.csv
/// and, unless the scattered part is an empty matrix, <stem>_S.csv.
void write_result(const std::filesystem::path& file, const DecompositionResult& result);
DecompositionResult read_result(const std::filesystem::path& file);

/// Detection outcomes serialize every scored field; bus and channel indices
/// are 1-based in the file.
void write_outcome(const std::filesystem::path& file, const DetectionOutcome& outcome);
DetectionOutcome read_outcome(const std::filesystem::path& file);

/// Bundle of theory-side diagnostics for one instance. Which parts are
/// present depends on what the caller computed; absent parts are simply
/// omitted from the file.
struct TheoryReport {
  std::optional<IncoherenceStats> stats;
  std::optional<LambdaRange> range;
  std::optional<CertificateReport> certificate;
  std::optional<ConditionVerdict> verdict;
  std::optional<NoisyBounds> bounds;
  bool noisy = false;
};

/// Scalars and margins only: certificate matrices stay in memory, the file
/// records support sets (1-based), residuals, margins, and verdicts. Reading
/// therefore returns a report whose matrix members are empty.
void write_theory_report(const std::filesystem::path& file, const TheoryReport& report);
TheoryReport read_theory_report(const std::filesystem::path& file);

/// Toolchain and library versions for experiment manifests.
std::map<std::string, std::string> environment_fingerprint();

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double x);

/// Generic CSV reader: one row per line, cells split on commas, no quoting.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& file);

}  // namespace lrcs::io
