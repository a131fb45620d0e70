#include "lrcs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "lrcs/errors.hpp"

namespace lrcs::io {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw Error("failed to format a floating-point value");
  return std::string(buf, end);
}

namespace {

using nlohmann::json;

std::string fmt(double x) { return format_double(x); }

double parse_double(std::string_view cell, const std::filesystem::path& file) {
  double x = 0.0;
  auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (ec != std::errc{} || end != cell.data() + cell.size())
    throw Error("bad numeric cell '" + std::string(cell) + "' in " + file.string());
  return x;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

json parse_json_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("cannot parse " + file.string() + ": " + e.what());
  }
}

void dump_json_file(const std::filesystem::path& file, const json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
  if (!out.good()) throw Error("write failed for " + file.string());
}

/// JSON has no literal for non-finite numbers, so they travel as strings.
json jnum(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double dnum(const json& j, const char* key, const std::filesystem::path& file) {
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error("field '" + std::string(key) + "' in " + file.string() + " is not a number");
}

json ints_one_based(const std::vector<int>& xs) {
  json arr = json::array();
  for (int x : xs) arr.push_back(x + 1);
  return arr;
}

std::vector<int> ints_zero_based(const json& arr, const char* key,
                                 const std::filesystem::path& file) {
  std::vector<int> out;
  for (const json& v : arr) {
    int x = v.get<int>();
    if (x < 1) throw Error("index list '" + std::string(key) + "' in " + file.string() +
                           " holds a value below 1");
    out.push_back(x - 1);
  }
  return out;
}

void require_kind(const json& j, const char* kind, const std::filesystem::path& file) {
  if (!j.contains("kind") || j.at("kind") != kind)
    throw Error(file.string() + " is not a " + kind + " file");
}

std::filesystem::path sidecar_path(const std::filesystem::path& file, const char* suffix) {
  std::filesystem::path p = file;
  p.replace_filename(file.stem().string() + suffix);
  return p;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& file, const CMat& m) {
  auto out = open_out(file);
  std::string row;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j) row += ',';
    const std::string idx = std::to_string(j + 1);
    row += "re_" + idx + ",im_" + idx;
  }
  out << row << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) row += ',';
      row += fmt(m(i, j).real());
      row += ',';
      row += fmt(m(i, j).imag());
    }
    out << row << '\n';
  }
  if (!out.good()) throw Error("write failed for " + file.string());
}

CMat read_matrix_csv(const std::filesystem::path& file) {
  const auto lines = read_lines(file);
  if (lines.empty()) throw Error(file.string() + " is empty");
  Eigen::Index p = 0;
  if (!lines[0].empty()) {
    const auto header = split_line(lines[0]);
    if (header.size() % 2 != 0)
      throw ShapeMismatch(file.string() + " header does not pair re/im columns");
    p = static_cast<Eigen::Index>(header.size() / 2);
    for (Eigen::Index j = 0; j < p; ++j) {
      const std::string idx = std::to_string(j + 1);
      if (header[2 * j] != "re_" + idx || header[2 * j + 1] != "im_" + idx)
        throw Error(file.string() + " header column " + std::to_string(2 * j + 1) +
                    " is not re_" + idx + ",im_" + idx);
    }
  }
  const Eigen::Index t = static_cast<Eigen::Index>(lines.size()) - 1;
  CMat m(t, p);
  for (Eigen::Index i = 0; i < t; ++i) {
    if (p == 0) {
      if (!lines[i + 1].empty())
        throw ShapeMismatch(file.string() + " row " + std::to_string(i + 1) +
                            " should be empty for a zero-column matrix");
      continue;
    }
    const auto cells = split_line(lines[i + 1]);
    if (static_cast<Eigen::Index>(cells.size()) != 2 * p)
      throw ShapeMismatch(file.string() + " row " + std::to_string(i + 1) + " has " +
                          std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(2 * p));
    for (Eigen::Index j = 0; j < p; ++j)
      m(i, j) = Complex(parse_double(cells[2 * j], file), parse_double(cells[2 * j + 1], file));
  }
  return m;
}

void write_mask_csv(const std::filesystem::path& file, const Mask& mask) {
  auto out = open_out(file);
  std::string row;
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    if (j) row += ',';
    row += "col_" + std::to_string(j + 1);
  }
  out << row << '\n';
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      if (j) row += ',';
      row += mask(i, j) ? '1' : '0';
    }
    out << row << '\n';
  }
  if (!out.good()) throw Error("write failed for " + file.string());
}

Mask read_mask_csv(const std::filesystem::path& file) {
  const auto lines = read_lines(file);
  if (lines.empty()) throw Error(file.string() + " is empty");
  const Eigen::Index p =
      lines[0].empty() ? 0 : static_cast<Eigen::Index>(split_line(lines[0]).size());
  const Eigen::Index t = static_cast<Eigen::Index>(lines.size()) - 1;
  Mask mask(t, p);
  for (Eigen::Index i = 0; i < t; ++i) {
    const auto cells = split_line(lines[i + 1]);
    if (static_cast<Eigen::Index>(cells.size()) != p)
      throw ShapeMismatch(file.string() + " row " + std::to_string(i + 1) + " has " +
                          std::to_string(cells.size()) + " cells, expected " + std::to_string(p));
    for (Eigen::Index j = 0; j < p; ++j) {
      if (cells[j] == "1")
        mask(i, j) = true;
      else if (cells[j] == "0")
        mask(i, j) = false;
      else
        throw Error("mask cell '" + std::string(cells[j]) + "' in " + file.string() +
                    " is neither 0 nor 1");
    }
  }
  return mask;
}

void write_topology(const std::filesystem::path& file, const GridTopology& topo) {
  json j;
  j["n_buses"] = topo.n_buses;
  json lines = json::array();
  for (const Line& line : topo.lines) {
    lines.push_back({{"i", line.i + 1},
                     {"j", line.j + 1},
                     {"z_re", line.z.real()},
                     {"z_im", line.z.imag()},
                     {"y_re", line.y.real()},
                     {"y_im", line.y.imag()}});
  }
  j["lines"] = std::move(lines);
  json channels = json::array();
  for (const Channel& ch : topo.channels) {
    if (const auto* v = std::get_if<VoltageChannel>(&ch))
      channels.push_back({{"kind", "V"}, {"bus", v->bus + 1}});
    else {
      const auto& c = std::get<CurrentChannel>(ch);
      channels.push_back({{"kind", "I"}, {"from", c.from + 1}, {"to", c.to + 1}});
    }
  }
  j["channels"] = std::move(channels);
  dump_json_file(file, j);
}

GridTopology read_topology(const std::filesystem::path& file) {
  const json j = parse_json_file(file);
  GridTopology topo;
  try {
    topo.n_buses = j.at("n_buses").get<int>();
    for (const json& jl : j.at("lines")) {
      Line line;
      line.i = jl.at("i").get<int>() - 1;
      line.j = jl.at("j").get<int>() - 1;
      line.z = Complex(jl.at("z_re").get<double>(), jl.at("z_im").get<double>());
      line.y = Complex(jl.at("y_re").get<double>(), jl.at("y_im").get<double>());
      topo.lines.push_back(line);
    }
    for (const json& jc : j.at("channels")) {
      const std::string kind = jc.at("kind").get<std::string>();
      if (kind == "V")
        topo.channels.push_back(VoltageChannel{jc.at("bus").get<int>() - 1});
      else if (kind == "I")
        topo.channels.push_back(CurrentChannel{jc.at("from").get<int>() - 1, jc.at("to").get<int>() - 1});
      else
        throw Error("channel kind '" + kind + "' in " + file.string() + " is neither V nor I");
    }
  } catch (const json::exception& e) {
    throw Error("cannot read topology " + file.string() + ": " + e.what());
  }
  topo.validate();
  return topo;
}

void write_scenario(const std::filesystem::path& file, const ScenarioConfig& config) {
  json c;
  c["t"] = config.t;
  c["p"] = config.p;
  c["n"] = config.n;
  c["rank"] = config.rank;
  c["seed"] = config.seed;
  c["w_kind"] = config.w_kind;
  c["binary_row_ones"] = config.binary_row_ones;
  c["binary_col_ones"] = config.binary_col_ones;
  c["support_size"] = config.support_size;
  c["support"] = ints_one_based(config.support);
  c["attack_magnitude"] = config.attack_magnitude;
  c["scatter_density"] = config.scatter_density;
  c["sigma"] = config.sigma;
  c["keep_fraction"] = config.keep_fraction;
  c["w_scale"] = config.w_scale;
  dump_json_file(file, json{{"kind", "scenario"}, {"config", std::move(c)}});
}

ScenarioConfig read_scenario_config(const std::filesystem::path& file) {
  const json j = parse_json_file(file);
  require_kind(j, "scenario", file);
  ScenarioConfig config;
  try {
    const json& c = j.at("config");
    config.t = c.at("t").get<int>();
    config.p = c.at("p").get<int>();
    config.n = c.at("n").get<int>();
    config.rank = c.at("rank").get<int>();
    config.seed = c.at("seed").get<std::uint64_t>();
    config.w_kind = c.at("w_kind").get<std::string>();
    config.binary_row_ones = c.at("binary_row_ones").get<int>();
    config.binary_col_ones = c.at("binary_col_ones").get<int>();
    config.support_size = c.at("support_size").get<int>();
    config.support = ints_zero_based(c.at("support"), "support", file);
    config.attack_magnitude = c.at("attack_magnitude").get<double>();
    config.scatter_density = c.at("scatter_density").get<double>();
    config.sigma = c.at("sigma").get<double>();
    config.keep_fraction = c.at("keep_fraction").get<double>();
    config.w_scale = c.at("w_scale").get<double>();
  } catch (const json::exception& e) {
    throw Error("cannot read scenario " + file.string() + ": " + e.what());
  }
  return config;
}

AttackScenario load_scenario(const std::filesystem::path& file) {
  return generate(read_scenario_config(file));
}

void write_result(const std::filesystem::path& file, const DecompositionResult& result) {
  json j;
  j["kind"] = "result";
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["constraint_violation"] = jnum(result.constraint_violation);
  j["objective"] = result.objective;
  j["primal_residuals"] = result.primal_residuals;
  j["dual_residuals"] = result.dual_residuals;
  const std::string stem = file.stem().string();
  j["L"] = stem + "_L.csv";
  j["C"] = stem + "_C.csv";
  write_matrix_csv(sidecar_path(file, "_L.csv"), result.L_star);
  write_matrix_csv(sidecar_path(file, "_C.csv"), result.C_star);
  if (result.S_star.size() > 0) {
    j["S"] = stem + "_S.csv";
    write_matrix_csv(sidecar_path(file, "_S.csv"), result.S_star);
  }
  dump_json_file(file, j);
}

DecompositionResult read_result(const std::filesystem::path& file) {
  const json j = parse_json_file(file);
  require_kind(j, "result", file);
  DecompositionResult result;
  try {
    result.iterations = j.at("iterations").get<int>();
    result.converged = j.at("converged").get<bool>();
    result.constraint_violation = dnum(j, "constraint_violation", file);
    result.objective = j.at("objective").get<std::vector<double>>();
    result.primal_residuals = j.at("primal_residuals").get<std::vector<double>>();
    result.dual_residuals = j.at("dual_residuals").get<std::vector<double>>();
    const auto dir = file.parent_path();
    result.L_star = read_matrix_csv(dir / j.at("L").get<std::string>());
    result.C_star = read_matrix_csv(dir / j.at("C").get<std::string>());
    if (j.contains("S")) result.S_star = read_matrix_csv(dir / j.at("S").get<std::string>());
  } catch (const json::exception& e) {
    throw Error("cannot read result " + file.string() + ": " + e.what());
  }
  return result;
}

void write_outcome(const std::filesystem::path& file, const DetectionOutcome& outcome) {
  json j;
  j["kind"] = "outcome";
  j["buses"] = ints_one_based(outcome.estimate.buses);
  j["channels"] = ints_one_based(outcome.estimate.channels);
  j["subspace_gap"] = jnum(outcome.subspace_gap);
  j["support_exact"] = outcome.support_exact;
  j["channels_exact"] = outcome.channels_exact;
  j["success"] = outcome.success;
  j["false_alarms"] = outcome.false_alarms;
  j["clean_channel_rel_err"] = jnum(outcome.clean_channel_rel_err);
  dump_json_file(file, j);
}

DetectionOutcome read_outcome(const std::filesystem::path& file) {
  const json j = parse_json_file(file);
  require_kind(j, "outcome", file);
  DetectionOutcome outcome;
  try {
    outcome.estimate.buses = ints_zero_based(j.at("buses"), "buses", file);
    outcome.estimate.channels = ints_zero_based(j.at("channels"), "channels", file);
    outcome.subspace_gap = dnum(j, "subspace_gap", file);
    outcome.support_exact = j.at("support_exact").get<bool>();
    outcome.channels_exact = j.at("channels_exact").get<bool>();
    outcome.success = j.at("success").get<bool>();
    outcome.false_alarms = j.at("false_alarms").get<int>();
    outcome.clean_channel_rel_err = dnum(j, "clean_channel_rel_err", file);
  } catch (const json::exception& e) {
    throw Error("cannot read outcome " + file.string() + ": " + e.what());
  }
  return outcome;
}

void write_theory_report(const std::filesystem::path& file, const TheoryReport& report) {
  json j;
  j["kind"] = "theory_report";
  j["noisy"] = report.noisy;
  if (report.stats) {
    const IncoherenceStats& s = *report.stats;
    json js{{"epsilon", jnum(s.epsilon)}, {"mu", jnum(s.mu)}, {"rho", jnum(s.rho)},
            {"r", s.r},                   {"t", s.t},         {"p", s.p},
            {"n", s.n}};
    json sigmas = json::array();
    for (const SigmaEstimate& e : s.sigma)
      sigmas.push_back({{"k", e.k},
                        {"value", jnum(e.value)},
                        {"exhaustive", e.exhaustive},
                        {"greedy_lower", jnum(e.greedy_lower)},
                        {"gershgorin_upper", jnum(e.gershgorin_upper)}});
    js["sigma"] = std::move(sigmas);
    j["stats"] = std::move(js);
  }
  if (report.range) {
    const LambdaRange& r = *report.range;
    j["range"] = {{"psi_tilde", jnum(r.psi_tilde)},
                  {"c", jnum(r.c)},
                  {"k_tilde", r.k_tilde},
                  {"noisy", r.noisy},
                  {"lambda_min", jnum(r.lambda_min)},
                  {"lambda_max", jnum(r.lambda_max)},
                  {"lambda_min_noisy", jnum(r.lambda_min_noisy)},
                  {"lambda_max_noisy", jnum(r.lambda_max_noisy)},
                  {"feasible", r.feasible}};
  }
  if (report.certificate) {
    const CertificateReport& c = *report.certificate;
    j["certificate"] = {{"lambda", jnum(c.lambda)},
                        {"support", ints_one_based(c.support)},
                        {"forced", ints_one_based(c.forced)},
                        {"h_residual", jnum(c.h_residual)},
                        {"approximate", c.approximate},
                        {"psi", jnum(c.psi)},
                        {"neumann_terms", c.neumann_terms},
                        {"neumann_tail", jnum(c.neumann_tail)},
                        {"q_norm_f", jnum(c.q_norm_f)},
                        {"a_residual", jnum(c.a_residual)},
                        {"b_value", jnum(c.b_value)},
                        {"c_residual", jnum(c.c_residual)},
                        {"c_free_max", jnum(c.c_free_max)},
                        {"d_value", jnum(c.d_value)},
                        {"margin_a", jnum(c.margin_a)},
                        {"margin_b", jnum(c.margin_b)},
                        {"margin_c", jnum(c.margin_c)},
                        {"margin_d", jnum(c.margin_d)},
                        {"valid", c.valid},
                        {"note", c.note}};
  }
  if (report.verdict) {
    const ConditionVerdict& v = *report.verdict;
    j["verdict"] = {{"a", v.a},
                    {"b", v.b},
                    {"c", v.c},
                    {"d", v.d},
                    {"all", v.all},
                    {"margin_a", jnum(v.margin_a)},
                    {"margin_b", jnum(v.margin_b)},
                    {"margin_c", jnum(v.margin_c)},
                    {"margin_d", jnum(v.margin_d)}};
  }
  if (report.bounds)
    j["bounds"] = {{"bound_L", jnum(report.bounds->bound_L)},
                   {"bound_C", jnum(report.bounds->bound_C)}};
  dump_json_file(file, j);
}

TheoryReport read_theory_report(const std::filesystem::path& file) {
  const json j = parse_json_file(file);
  require_kind(j, "theory_report", file);
  TheoryReport report;
  try {
    report.noisy = j.at("noisy").get<bool>();
    if (j.contains("stats")) {
      const json& js = j.at("stats");
      IncoherenceStats s;
      s.epsilon = dnum(js, "epsilon", file);
      s.mu = dnum(js, "mu", file);
      s.rho = dnum(js, "rho", file);
      s.r = js.at("r").get<int>();
      s.t = js.at("t").get<int>();
      s.p = js.at("p").get<int>();
      s.n = js.at("n").get<int>();
      for (const json& je : js.at("sigma")) {
        SigmaEstimate e;
        e.k = je.at("k").get<int>();
        e.value = dnum(je, "value", file);
        e.exhaustive = je.at("exhaustive").get<bool>();
        e.greedy_lower = dnum(je, "greedy_lower", file);
        e.gershgorin_upper = dnum(je, "gershgorin_upper", file);
        s.sigma.push_back(e);
      }
      report.stats = std::move(s);
    }
    if (j.contains("range")) {
      const json& jr = j.at("range");
      LambdaRange r;
      r.psi_tilde = dnum(jr, "psi_tilde", file);
      r.c = dnum(jr, "c", file);
      r.k_tilde = jr.at("k_tilde").get<int>();
      r.noisy = jr.at("noisy").get<bool>();
      r.lambda_min = dnum(jr, "lambda_min", file);
      r.lambda_max = dnum(jr, "lambda_max", file);
      r.lambda_min_noisy = dnum(jr, "lambda_min_noisy", file);
      r.lambda_max_noisy = dnum(jr, "lambda_max_noisy", file);
      r.feasible = jr.at("feasible").get<bool>();
      report.range = r;
    }
    if (j.contains("certificate")) {
      const json& jc = j.at("certificate");
      CertificateReport c;
      c.lambda = dnum(jc, "lambda", file);
      c.support = ints_zero_based(jc.at("support"), "support", file);
      c.forced = ints_zero_based(jc.at("forced"), "forced", file);
      c.h_residual = dnum(jc, "h_residual", file);
      c.approximate = jc.at("approximate").get<bool>();
      c.psi = dnum(jc, "psi", file);
      c.neumann_terms = jc.at("neumann_terms").get<int>();
      c.neumann_tail = dnum(jc, "neumann_tail", file);
      c.q_norm_f = dnum(jc, "q_norm_f", file);
      c.a_residual = dnum(jc, "a_residual", file);
      c.b_value = dnum(jc, "b_value", file);
      c.c_residual = dnum(jc, "c_residual", file);
      c.c_free_max = dnum(jc, "c_free_max", file);
      c.d_value = dnum(jc, "d_value", file);
      c.margin_a = dnum(jc, "margin_a", file);
      c.margin_b = dnum(jc, "margin_b", file);
      c.margin_c = dnum(jc, "margin_c", file);
      c.margin_d = dnum(jc, "margin_d", file);
      c.valid = jc.at("valid").get<bool>();
      c.note = jc.at("note").get<std::string>();
      report.certificate = std::move(c);
    }
    if (j.contains("verdict")) {
      const json& jv = j.at("verdict");
      ConditionVerdict v;
      v.a = jv.at("a").get<bool>();
      v.b = jv.at("b").get<bool>();
      v.c = jv.at("c").get<bool>();
      v.d = jv.at("d").get<bool>();
      v.all = jv.at("all").get<bool>();
      v.margin_a = dnum(jv, "margin_a", file);
      v.margin_b = dnum(jv, "margin_b", file);
      v.margin_c = dnum(jv, "margin_c", file);
      v.margin_d = dnum(jv, "margin_d", file);
      report.verdict = v;
    }
    if (j.contains("bounds")) {
      NoisyBounds b;
      b.bound_L = dnum(j.at("bounds"), "bound_L", file);
      b.bound_C = dnum(j.at("bounds"), "bound_C", file);
      report.bounds = b;
    }
  } catch (const json::exception& e) {
    throw Error("cannot read theory report " + file.string() + ": " + e.what());
  }
  return report;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& file) {
  std::vector<std::vector<std::string>> rows;
  for (const std::string& line : read_lines(file)) {
    std::vector<std::string> row;
    for (std::string_view cell : split_line(line)) row.emplace_back(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, std::string> environment_fingerprint() {
  std::map<std::string, std::string> env;
#if defined(__clang__)
  env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  env["compiler"] = std::string("gcc ") + __VERSION__;
#else
  env["compiler"] = "unknown";
#endif
  env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
#ifdef _OPENMP
  env["openmp"] = std::to_string(_OPENMP);
#else
  env["openmp"] = "off";
#endif
#ifdef NDEBUG
  env["build"] = "release";
#else
  env["build"] = "debug";
#endif
  env["cxx_standard"] = std::to_string(__cplusplus);
  return env;
}

}  // namespace lrcs::io
