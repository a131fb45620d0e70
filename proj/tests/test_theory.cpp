#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <doctest.h>

#include "lrcs/errors.hpp"
#include "lrcs/grid.hpp"
#include "lrcs/rng.hpp"
#include "lrcs/sim.hpp"
#include "lrcs/theory.hpp"

using namespace lrcs;

namespace {

CMat random_unit_columns(Rng& rng, int p, int n) {
  CMat w(p, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < p; ++i) w(i, j) = Complex(rng.gaussian(), rng.gaussian());
    w.col(j) /= w.col(j).norm();
  }
  return w;
}

// Exhaustive reference for the worst conditioned support Gram inverse,
// written without reusing the library's enumeration.
double brute_sigma(const CMat& w, int k) {
  const int n = (int)w.cols();
  double worst = 0.0;
  std::vector<int> pick(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      CMat sub(w.rows(), k);
      for (int i = 0; i < k; ++i) sub.col(i) = w.col(pick[i]);
      const CMat gram = sub.adjoint() * sub;
      const Eigen::JacobiSVD<CMat> svd(gram);
      const double smin = svd.singularValues().minCoeff();
      if (smin > 0.0) worst = std::max(worst, 1.0 / smin);
      return;
    }
    for (int j = start; j < n; ++j) {
      pick[depth] = j;
      rec(j + 1, depth + 1);
    }
  };
  rec(0, 0);
  return worst;
}

// Flat row space probe: unit modulus rows, so the column incoherence constant
// of the right factor sits at its minimum.
CMat flat_rowspace_lowrank(int t, int p, int r, Rng& rng) {
  CMat v(p, r);
  for (int l = 0; l < r; ++l)
    for (int j = 0; j < p; ++j) {
      const double angle = 2.0 * M_PI * j * (l + 1) / p;
      v(j, l) = Complex(std::cos(angle), std::sin(angle)) / std::sqrt((double)p);
    }
  CMat a(t, r);
  for (int i = 0; i < t; ++i)
    for (int l = 0; l < r; ++l) a(i, l) = Complex(rng.gaussian(), rng.gaussian());
  return a * v.adjoint();
}

}  // namespace

TEST_CASE("orthonormal coefficients have zero coherence and unit conditioning") {
  CMat w = CMat::Zero(8, 4);
  for (int j = 0; j < 4; ++j) w(j, j) = 1.0;
  const CMat L = gen_synthetic_lowrank(10, 8, 2, 9);
  const IncoherenceStats stats = compute_incoherence(L, w, {1, 2, 3});
  CHECK(stats.mu == 0.0);
  for (int k : {1, 2, 3}) CHECK(stats.sigma_for(k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metered ring coherence matches the closed form") {
  for (int n : {4, 6, 8, 10}) {
    const TransformMatrix tm = build_ring_network(n);
    const CMat L = gen_synthetic_lowrank(12, (int)tm.p(), 2, 100 + n);
    const IncoherenceStats stats = compute_incoherence(L, tm.w, {1});
    const double expected = 2.0 / std::sqrt((double)n * n + 2.0 * n);
    CHECK(std::abs(stats.mu - expected) <= 1e-12);
  }
}

TEST_CASE("conditioning estimates respect their bracket") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat w = random_unit_columns(rng, 8, 4);
    const CMat L = gen_synthetic_lowrank(10, 8, 2, 200 + trial);
    const IncoherenceStats stats = compute_incoherence(L, w, {2});
    const SigmaEstimate& est = stats.sigma_entry(2);
    REQUIRE(est.exhaustive);
    CHECK(est.value == doctest::Approx(brute_sigma(w, 2)).epsilon(1e-9));
    CHECK(est.value >= est.greedy_lower - 1e-12);
    if (2.0 * stats.mu < 1.0) CHECK(est.value <= est.gershgorin_upper + 1e-12);
  }
}

TEST_CASE("first conditioning value is one and growth is monotone") {
  Rng rng(56);
  const CMat w = random_unit_columns(rng, 10, 5);
  const CMat L = gen_synthetic_lowrank(12, 10, 3, 77);
  const IncoherenceStats stats = compute_incoherence(L, w, {1, 2, 3, 4});
  CHECK(std::abs(stats.sigma_for(1) - 1.0) <= 1e-12);
  for (int k = 2; k <= 4; ++k)
    CHECK(stats.sigma_for(k) >= stats.sigma_for(k - 1) - 1e-12);
}

TEST_CASE("large supports fall back to the bracket pair") {
  Rng rng(57);
  const CMat w = random_unit_columns(rng, 40, 30);
  const CMat L = gen_synthetic_lowrank(20, 40, 2, 300);
  const IncoherenceStats stats = compute_incoherence(L, w, {5});
  const SigmaEstimate& est = stats.sigma_entry(5);
  CHECK_FALSE(est.exhaustive);
  CHECK(est.greedy_lower >= 1.0 - 1e-12);
  CHECK(est.value >= est.greedy_lower - 1e-12);
  CHECK(est.value == est.gershgorin_upper);
}

TEST_CASE("closed form conditioning bound evaluates and guards its domain") {
  CHECK(gershgorin_sigma_bound(0.37, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gershgorin_sigma_bound(0.1, 3) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK_THROWS_AS(gershgorin_sigma_bound(0.5, 2), BoundInapplicable);
}

TEST_CASE("exhaustive conditioning never beats the closed form bound") {
  Rng rng(58);
  int applicable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + (int)(rng.uniform() * 4);
    const int p = n + 2 + (int)(rng.uniform() * 8);
    const CMat w = random_unit_columns(rng, p, n);
    double mu = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        mu = std::max(mu, std::abs((w.col(i).adjoint() * w.col(j))(0, 0)));
    for (int k = 2; k <= std::min(3, n); ++k) {
      if (k * mu >= 1.0) continue;
      ++applicable;
      CHECK(brute_sigma(w, k) <= gershgorin_sigma_bound(mu, k) + 1e-10);
    }
  }
  CHECK(applicable > 50);
}

TEST_CASE("window admissibility arithmetic for the standard pair") {
  const double psi = 1.0 / 8.0, c = 1.0 / 4.0;
  const double lhs = (2.0 - psi) * std::sqrt(psi) / (1.0 - psi);
  const double rhs = std::sqrt((1.0 + c) / (1.0 - c));
  CHECK(lhs == doctest::Approx(0.757614).epsilon(1e-5));
  CHECK(rhs == doctest::Approx(1.290994).epsilon(1e-5));
  CHECK(lhs <= rhs);
}

TEST_CASE("weight window behavior") {
  Rng rng(59);
  // Coefficients supported on coordinates the row space never touches, so the
  // alignment parameter vanishes.
  CMat w = CMat::Zero(10, 4);
  for (int j = 0; j < 4; ++j) w(6 + (j % 4), j) = 1.0;
  CMat v = CMat::Zero(10, 2);
  v(0, 0) = 1.0;
  v(1, 1) = 1.0;
  CMat a(8, 2);
  for (int i = 0; i < 8; ++i)
    for (int l = 0; l < 2; ++l) a(i, l) = Complex(rng.gaussian(), rng.gaussian());
  const CMat L = a * v.adjoint();

  const IncoherenceStats stats = compute_incoherence(L, w, {1, 2});

  SUBCASE("zero alignment makes the window start at zero") {
    CHECK(stats.epsilon <= 1e-12);
    const LambdaRange range = lambda_range(stats, 0.125, 0.25, 1);
    CHECK(range.lambda_min <= 1e-10);
    CHECK(range.lambda_max > 0.0);
    CHECK(range.feasible);
  }
  SUBCASE("noisy window nests inside the noiseless one") {
    const LambdaRange range = lambda_range(stats, 0.125, 0.25, 2);
    CHECK(range.lambda_min_noisy >= range.lambda_min - 1e-15);
    CHECK(range.lambda_max_noisy <= range.lambda_max + 1e-15);
  }
  SUBCASE("inadmissible shape pair is rejected") {
    CHECK_THROWS_AS(lambda_range(stats, 0.9, 0.1, 1), InvalidPsiC);
  }
  SUBCASE("support budget below one is rejected") {
    CHECK_THROWS_AS(lambda_range(stats, 0.125, 0.25, 0), InvalidSize);
  }
}

TEST_CASE("coherence above the budget cap kills feasibility") {
  Rng rng(60);
  const CMat w = random_unit_columns(rng, 6, 5);
  const CMat L = gen_synthetic_lowrank(8, 6, 1, 61);
  const IncoherenceStats stats = compute_incoherence(L, w, {4});
  REQUIRE(4.0 * stats.mu > 0.25);
  const LambdaRange range = lambda_range(stats, 0.125, 0.25, 4);
  CHECK_FALSE(range.feasible);
}

TEST_CASE("ambiguous numerical rank is refused") {
  CMat L = CMat::Zero(6, 6);
  L(0, 0) = 1.0;
  L(1, 1) = 5e-10;  // inside the ambiguity band at the default tolerance
  const CMat w = CMat::Identity(6, 3);
  CHECK_THROWS_AS(compute_incoherence(L, w, {1}), RankDeficiencyAmbiguous);
}

TEST_CASE("noisy recovery bounds") {
  CMat w = CMat::Zero(10, 4);
  for (int j = 0; j < 4; ++j) w(j, j) = 1.0;
  const CMat L = gen_synthetic_lowrank(10, 10, 1, 62);
  const IncoherenceStats stats = compute_incoherence(L, w, {1});
  REQUIRE(stats.mu == 0.0);

  SUBCASE("zero budget means zero error") {
    const NoisyBounds b = noisy_error_bounds(stats, 1.0, 1, 0.0, 10, 10, 1, 0.125);
    CHECK(b.bound_L == 0.0);
    CHECK(b.bound_C == 0.0);
  }
  SUBCASE("transcription cross check at a pinned point") {
    const NoisyBounds b = noisy_error_bounds(stats, 1.0, 1, 1.0, 10, 10, 1, 0.125);
    const double psi = 0.125;
    const double expected =
        (2.0 - psi + (1.0 + (2.0 - psi) * std::sqrt(1.0 + 3.0 * stats.mu)) / 1.0 *
                         std::sqrt(10.0 + 3.0)) *
        2.0 * 1.0 / (1.0 - psi);
    CHECK(b.bound_L == doctest::Approx(expected).epsilon(1e-12));
    CHECK(b.bound_L == doctest::Approx(27.97934).epsilon(1e-5));
  }
  SUBCASE("bounds are linear in the budget") {
    const NoisyBounds one = noisy_error_bounds(stats, 1.0, 1, 1.0, 10, 10, 1, 0.125);
    const NoisyBounds two = noisy_error_bounds(stats, 1.0, 1, 2.0, 10, 10, 1, 0.125);
    CHECK(two.bound_L == doctest::Approx(2.0 * one.bound_L).epsilon(1e-12));
    CHECK(two.bound_C == doctest::Approx(2.0 * one.bound_C).epsilon(1e-12));
  }
}

TEST_CASE("alignment decays with network size on the metered family") {
  Rng rng(63);
  std::vector<double> log_n, log_eps;
  for (int n : {8, 16, 32, 64}) {
    const TransformMatrix tm = build_ring_network(n);
    const CMat L = flat_rowspace_lowrank(8, (int)tm.p(), 1, rng);
    const IncoherenceStats stats = compute_incoherence(L, tm.w, {1});
    log_n.push_back(std::log((double)n));
    log_eps.push_back(std::log(stats.epsilon));
  }
  double mean_x = 0, mean_y = 0;
  for (size_t i = 0; i < log_n.size(); ++i) {
    mean_x += log_n[i];
    mean_y += log_eps[i];
  }
  mean_x /= log_n.size();
  mean_y /= log_n.size();
  double cov = 0, var = 0;
  for (size_t i = 0; i < log_n.size(); ++i) {
    cov += (log_n[i] - mean_x) * (log_eps[i] - mean_y);
    var += (log_n[i] - mean_x) * (log_n[i] - mean_x);
  }
  CHECK(cov / var <= -0.4);
}

TEST_CASE("row space intersection test on coordinate examples") {
  CMat v = CMat::Zero(6, 1);
  v(0, 0) = 1.0;
  CHECK_FALSE(trivial_support_rowspace_intersection(v, {0}));
  CHECK(trivial_support_rowspace_intersection(v, {1, 2}));

  std::vector<int> all = {0, 1, 2, 3, 4, 5};
  CHECK_FALSE(trivial_support_rowspace_intersection(v, all));
}

TEST_CASE("flat incoherence keeps the metered feasibility threshold linear") {
  // The first network size whose support budget floor reaches one admits a
  // nonempty window and stays feasible from there on.
  Rng rng(64);
  bool seen_feasible = false;
  int first_feasible = -1;
  for (int n : {16, 32, 48, 64}) {
    const TransformMatrix tm = build_ring_network(n);
    const CMat L = flat_rowspace_lowrank(8, (int)tm.p(), 1, rng);
    const IncoherenceStats stats = compute_incoherence(L, tm.w, {1});
    const int k_tilde = (int)std::floor((double)n / (48.0 * stats.rho * 1.0) + 1e-9);
    if (k_tilde < 1) {
      CHECK_FALSE(seen_feasible);
      continue;
    }
    const LambdaRange range = lambda_range(stats, 0.125, 0.25, k_tilde);
    if (range.feasible && !seen_feasible) {
      seen_feasible = true;
      first_feasible = n;
    }
    if (seen_feasible) CHECK(range.feasible);
  }
  CHECK(seen_feasible);
  CHECK(first_feasible == 48);
}
