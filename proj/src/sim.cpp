#include "lrcs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lrcs/errors.hpp"
#include "lrcs/rng.hpp"

namespace lrcs {

namespace {

// Seed-derivation stage tags.
enum Stage : std::uint64_t {
  kStageLowrank = 1,
  kStageTransform = 2,
  kStageAttack = 3,
  kStageScatter = 4,
  kStageNoise = 5,
  kStageMask = 6,
};

CMat gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  CMat X(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = Complex(rng.gaussian(), 0.0);
  return X;
}

// 0/1 matrix with exact row and column degrees via pairing with swap repair.
CMat binary_degree_matrix(int rows, int cols, int row_ones, int col_ones, Rng& rng) {
  if (rows * row_ones != cols * col_ones)
    throw InvalidSize("binary coefficient degrees are inconsistent");
  if (row_ones < 1 || row_ones > cols) throw InvalidSize("row degree out of range");
  std::vector<int> slots;
  slots.reserve(static_cast<std::size_t>(rows * row_ones));
  for (int attempt = 0; attempt < 64; ++attempt) {
    slots.clear();
    for (int c = 0; c < cols; ++c)
      for (int d = 0; d < col_ones; ++d) slots.push_back(c);
    rng.shuffle(slots);
    auto slot = [&](int r, int k) -> int& {
      return slots[static_cast<std::size_t>(r * row_ones + k)];
    };
    auto row_has = [&](int r, int c, int skip) {
      for (int k = 0; k < row_ones; ++k)
        if (k != skip && slot(r, k) == c) return true;
      return false;
    };
    bool ok = true;
    for (int pass = 0; pass < rows * row_ones && ok; ++pass) {
      int bad_r = -1, bad_k = -1;
      for (int r = 0; r < rows && bad_r < 0; ++r)
        for (int k = 0; k < row_ones; ++k)
          if (row_has(r, slot(r, k), k)) {
            bad_r = r;
            bad_k = k;
            break;
          }
      if (bad_r < 0) break;
      const int a = slot(bad_r, bad_k);
      bool swapped = false;
      for (int tries = 0; tries < 4 * rows && !swapped; ++tries) {
        const int r2 = static_cast<int>(rng.below(static_cast<std::uint64_t>(rows)));
        if (r2 == bad_r) continue;
        for (int k2 = 0; k2 < row_ones; ++k2) {
          const int b = slot(r2, k2);
          if (b == a) continue;
          if (row_has(bad_r, b, bad_k)) continue;
          if (row_has(r2, a, k2)) continue;
          std::swap(slot(bad_r, bad_k), slot(r2, k2));
          swapped = true;
          break;
        }
      }
      if (!swapped) ok = false;
    }
    if (!ok) continue;
    bool clean = true;
    for (int r = 0; r < rows && clean; ++r)
      for (int k = 0; k < row_ones && clean; ++k)
        if (row_has(r, slot(r, k), k)) clean = false;
    if (!clean) continue;
    CMat W = CMat::Zero(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < row_ones; ++k) W(r, slot(r, k)) = Complex(1.0, 0.0);
    return W;
  }
  throw DegenerateAttack("could not realize the binary degree sequence");
}

std::vector<int> channel_support_union(const CMat& W, const std::vector<int>& support) {
  std::set<int> chans;
  for (int j : support)
    for (Eigen::Index k = 0; k < W.rows(); ++k)
      if (W(k, j) != Complex(0.0, 0.0)) chans.insert(static_cast<int>(k));
  return {chans.begin(), chans.end()};
}

void assemble(AttackScenario& s) {
  s.M = s.L_bar + s.C_bar * s.W.transpose() + s.S_bar + s.N;
}

}  // namespace

CMat gen_synthetic_lowrank(int t, int p, int r, std::uint64_t seed) {
  if (t < 1 || p < 1) throw InvalidSize("matrix dimensions must be positive");
  if (r < 0 || r > std::min(t, p)) throw RankTooLarge("rank must lie in [0, min(t, p)]");
  if (r == 0) return CMat::Zero(t, p);
  Rng rng(seed);
  CMat A = gaussian_matrix(t, r, rng);
  CMat B = gaussian_matrix(p, r, rng);
  return A * B.transpose();
}

TransformMatrix make_transform(const ScenarioConfig& config) {
  Rng rng(Rng::derive(config.seed, kStageTransform));
  if (config.w_kind == "gaussian") {
    if (config.p < 1 || config.n < 1) throw InvalidSize("p and n must be positive");
    return TransformMatrix::from_w_bar(gaussian_matrix(config.p, config.n, rng));
  }
  if (config.w_kind == "binary") {
    return TransformMatrix::from_w_bar(binary_degree_matrix(
        config.p, config.n, config.binary_row_ones, config.binary_col_ones, rng));
  }
  if (config.w_kind == "ring") {
    return build_ring_network(config.n);
  }
  throw InvalidSize("unknown w_kind: " + config.w_kind);
}

AttackScenario inject_unobservable(const CMat& L_bar, const TransformMatrix& tm,
                                   const std::vector<int>& support,
                                   const std::vector<double>& magnitudes, std::uint64_t seed,
                                   double w_scale) {
  if (support.empty()) throw EmptySupport("attack support is empty");
  if (!(w_scale > 0.0)) throw InvalidSize("w_scale must be positive");
  if (!magnitudes.empty() && magnitudes.size() != support.size())
    throw InvalidSize("magnitudes must match support size (or be empty for unit scale)");
  if (L_bar.cols() != tm.p()) throw ShapeMismatch("L_bar columns must match channel count");
  std::set<int> seen;
  for (int j : support) {
    if (j < 0 || j >= tm.n()) throw InvalidSize("support bus out of range");
    if (!seen.insert(j).second) throw InvalidSize("support bus repeated");
    if (std::find(tm.unobserved_buses.begin(), tm.unobserved_buses.end(), j) !=
        tm.unobserved_buses.end())
      throw InvalidSize("support bus has no incident channel");
  }

  const Eigen::Index t = L_bar.rows();
  ThinSvd svd = thin_svd(L_bar);
  Eigen::Index r = 0;
  const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
  while (r < svd.s.size() && svd.s(r) > 1e-9 * smax) ++r;
  const CMat Ubar = svd.U.leftCols(r);

  AttackScenario s;
  s.tm = tm;
  s.W = w_scale * tm.w;
  s.w_scale = w_scale;
  s.L_bar = L_bar;
  s.S_bar = CMat::Zero(t, tm.p());
  s.N = CMat::Zero(t, tm.p());
  s.omega = full_mask(t, tm.p());
  s.eta = 0.0;
  s.support.assign(seen.begin(), seen.end());

  Rng rng(seed);
  bool accepted = false;
  for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
    CMat C = CMat::Zero(t, tm.n());
    for (std::size_t idx = 0; idx < support.size(); ++idx) {
      const double mag = magnitudes.empty() ? 1.0 : magnitudes[idx];
      const double to_scenario = tm.column_norms(support[idx]) / w_scale;
      for (Eigen::Index i = 0; i < t; ++i)
        C(i, support[idx]) = Complex(rng.gaussian() * mag * to_scenario, 0.0);
    }
    CMat D = C * s.W.transpose();
    const double escape = (D - Ubar * (Ubar.adjoint() * D)).norm();
    if (escape > 1e-8 * std::max(1.0, D.norm())) {
      s.C_bar = std::move(C);
      accepted = true;
    }
  }
  if (!accepted) throw DegenerateAttack("attack stayed inside the clean column space");

  s.attacked_channels = channel_support_union(s.W, s.support);
  CMat D = s.C_bar * s.W.transpose();
  std::vector<int> realized;
  const double scale = D.colwise().norm().maxCoeff();
  for (Eigen::Index k = 0; k < D.cols(); ++k)
    if (D.col(k).norm() > 1e-12 * std::max(1.0, scale)) realized.push_back(static_cast<int>(k));
  s.cancellation_detected = realized != s.attacked_channels;

  assemble(s);
  return s;
}

AttackScenario inject_scattered(AttackScenario scenario, double density, std::uint64_t seed) {
  if (density < 0.0 || density > 1.0) throw InvalidSize("density must lie in [0, 1]");
  const Eigen::Index t = scenario.M.rows();
  const Eigen::Index p = scenario.M.cols();
  const int total = static_cast<int>(t * p);
  const int cnt = static_cast<int>(std::ceil(density * static_cast<double>(total)));
  scenario.S_bar = CMat::Zero(t, p);
  if (cnt > 0) {
    Rng rng(seed);
    std::vector<int> cells = rng.sample_without_replacement(total, cnt);
    for (int cell : cells) {
      scenario.S_bar(cell % t, cell / t) = Complex(rng.gaussian(), 0.0);
    }
  }
  assemble(scenario);
  return scenario;
}

AttackScenario add_noise(AttackScenario scenario, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidSize("sigma must be nonnegative");
  const Eigen::Index t = scenario.M.rows();
  const Eigen::Index p = scenario.M.cols();
  if (sigma == 0.0) {
    scenario.N = CMat::Zero(t, p);
    scenario.eta = 0.0;
  } else {
    Rng rng(seed);
    scenario.N = sigma * gaussian_matrix(t, p, rng);
    scenario.eta = scenario.N.norm();
  }
  assemble(scenario);
  return scenario;
}

AttackScenario mask_observations(AttackScenario scenario, double keep, std::uint64_t seed) {
  if (keep <= 0.0 || keep > 1.0) throw InvalidSize("keep fraction must lie in (0, 1]");
  const Eigen::Index t = scenario.M.rows();
  const Eigen::Index p = scenario.M.cols();
  const int total = static_cast<int>(t * p);
  const int cnt = static_cast<int>(std::ceil(keep * static_cast<double>(total)));
  if (cnt < 1) throw EmptyMask("no observed entries");
  scenario.omega = Mask::Constant(t, p, false);
  Rng rng(seed);
  std::vector<int> cells = rng.sample_without_replacement(total, cnt);
  for (int cell : cells) scenario.omega(cell % t, cell / t) = true;
  return scenario;
}

AttackScenario generate(const ScenarioConfig& config) {
  TransformMatrix tm = make_transform(config);
  const int p = static_cast<int>(tm.p());
  CMat L_bar = gen_synthetic_lowrank(config.t, p, config.rank,
                                     Rng::derive(config.seed, kStageLowrank));

  AttackScenario s;
  std::vector<int> support = config.support;
  if (support.empty() && config.support_size > 0) {
    std::vector<int> observed;
    for (int j = 0; j < tm.n(); ++j)
      if (tm.column_norms(j) > 0.0) observed.push_back(j);
    if (config.support_size > static_cast<int>(observed.size()))
      throw InvalidSize("support size exceeds observed bus count");
    Rng rng(Rng::derive(config.seed, kStageAttack, 1));
    std::vector<int> perm = observed;
    rng.shuffle(perm);
    perm.resize(static_cast<std::size_t>(config.support_size));
    std::sort(perm.begin(), perm.end());
    support = std::move(perm);
  }

  double w_scale = config.w_scale;
  if (w_scale == 0.0) {
    if (config.w_kind == "binary")
      w_scale = std::sqrt(static_cast<double>(config.binary_col_ones));
    else if (config.w_kind == "gaussian" && config.sigma == 0.0)
      w_scale = std::sqrt(2.0);
    else
      w_scale = 1.0;
  }
  if (!support.empty()) {
    s = inject_unobservable(L_bar, tm, support,
                            std::vector<double>(support.size(), config.attack_magnitude),
                            Rng::derive(config.seed, kStageAttack, 2), w_scale);
  } else {
    s.tm = tm;
    s.W = w_scale * tm.w;
    s.w_scale = w_scale;
    s.L_bar = L_bar;
    s.C_bar = CMat::Zero(config.t, tm.n());
    s.S_bar = CMat::Zero(config.t, p);
    s.N = CMat::Zero(config.t, p);
    s.omega = full_mask(config.t, p);
    s.eta = 0.0;
    assemble(s);
  }

  if (config.scatter_density > 0.0)
    s = inject_scattered(std::move(s), config.scatter_density, Rng::derive(config.seed, kStageScatter));
  if (config.sigma > 0.0)
    s = add_noise(std::move(s), config.sigma, Rng::derive(config.seed, kStageNoise));
  if (config.keep_fraction < 1.0)
    s = mask_observations(std::move(s), config.keep_fraction, Rng::derive(config.seed, kStageMask));
  s.config = config;
  return s;
}

ProblemSpec to_problem(const AttackScenario& scenario, double lambda, SolveMode mode,
                       double lambda1, double lambda2) {
  ProblemSpec spec;
  spec.M = scenario.M;
  spec.omega = scenario.omega;
  spec.eta = scenario.eta;
  spec.W = scenario.W;
  spec.lambda = lambda;
  spec.lambda1 = lambda1;
  spec.lambda2 = lambda2;
  spec.mode = mode;
  return spec;
}

}  // namespace lrcs
