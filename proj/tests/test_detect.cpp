#include <cmath>

#include <doctest.h>

#include "lrcs/detect.hpp"
#include "lrcs/rng.hpp"
#include "lrcs/sim.hpp"

using namespace lrcs;

TEST_CASE("zero attack estimate is empty") {
  const CMat C = CMat::Zero(6, 4);
  const CMat W = CMat::Identity(4, 4);
  const SupportEstimate est = extract_support(C, W);
  CHECK(est.buses.empty());
  CHECK(est.channels.empty());
}

TEST_CASE("threshold semantics on a hand built column") {
  CMat C = CMat::Zero(5, 3);
  C(0, 1) = Complex(0.01, 0.0);
  const CMat W = CMat::Identity(3, 3);
  CHECK(extract_support(C, W, 0.002).buses == std::vector<int>{1});
  CHECK(extract_support(C, W, 0.02).buses.empty());
}

TEST_CASE("growing the threshold never grows the support") {
  Rng rng(41);
  CMat C(6, 5);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 6; ++i)
      C(i, j) = rng.uniform() < 0.4 ? Complex(rng.gaussian() * 0.01, 0.0) : Complex(0.0, 0.0);
  const CMat W = CMat::Identity(5, 5);
  size_t prev = extract_support(C, W, 1e-6).buses.size();
  for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
    const size_t cur = extract_support(C, W, eps).buses.size();
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("channel support reads the transformed attack") {
  CMat C = CMat::Zero(4, 3);
  C(0, 0) = Complex(1.0, 0.0);
  CMat W = CMat::Zero(5, 3);
  W(1, 0) = Complex(0.8, 0.0);
  W(3, 0) = Complex(-0.6, 0.0);
  W(2, 1) = Complex(1.0, 0.0);
  W(4, 2) = Complex(1.0, 0.0);
  const SupportEstimate est = extract_support(C, W, 0.002);
  CHECK(est.buses == std::vector<int>{0});
  CHECK(est.channels == std::vector<int>{1, 3});
}

TEST_CASE("subspace distance identities") {
  Rng rng(42);
  CMat A(8, 2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 8; ++i) A(i, j) = Complex(rng.gaussian(), rng.gaussian());

  SUBCASE("same space gives zero") {
    CMat B = A;
    B.col(0) *= Complex(2.0, 1.0);  // same span, different basis
    CHECK(subspace_distance(A, B) <= 1e-12);
  }
  SUBCASE("orthogonal spaces of equal rank give one") {
    CMat X = CMat::Zero(6, 1), Y = CMat::Zero(6, 1);
    X(0, 0) = 1.0;
    Y(3, 0) = 1.0;
    CHECK(subspace_distance(X, Y) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("symmetry") {
    CMat B(8, 2);
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 8; ++i) B(i, j) = Complex(rng.gaussian(), rng.gaussian());
    CHECK(subspace_distance(A, B) ==
          doctest::Approx(subspace_distance(B, A)).epsilon(1e-12));
  }
  SUBCASE("zero matrices compare to zero only") {
    const CMat Z = CMat::Zero(8, 2);
    CHECK(subspace_distance(Z, Z) == 0.0);
    CHECK(subspace_distance(Z, A) == 1.0);
  }
}

TEST_CASE("rotating a line by thirty degrees moves the projector by half") {
  const double theta = M_PI / 6.0;
  CMat a = CMat::Zero(4, 1), b = CMat::Zero(4, 1);
  a(0, 0) = 1.0;
  b(0, 0) = std::cos(theta);
  b(1, 0) = std::sin(theta);
  CHECK(subspace_distance(a, b) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("perfect recovery scores a clean success") {
  ScenarioConfig config;
  config.t = 12;
  config.p = 10;
  config.n = 5;
  config.rank = 2;
  config.support_size = 1;
  config.seed = 500;
  const AttackScenario sc = generate(config);

  DecompositionResult res;
  res.L_star = sc.L_bar;
  res.C_star = sc.C_bar;
  res.S_star = CMat::Zero(12, 10);
  res.converged = true;

  const DetectionOutcome out = score(sc, res);
  CHECK(out.success);
  CHECK(out.support_exact);
  CHECK(out.channels_exact);
  CHECK(out.false_alarms == 0);
  CHECK(out.subspace_gap <= 1e-10);
  CHECK(out.clean_channel_rel_err <= 1e-12);
}

TEST_CASE("false alarms are counted outside the true support") {
  ScenarioConfig config;
  config.t = 12;
  config.p = 10;
  config.n = 5;
  config.rank = 2;
  config.support = {2};
  config.seed = 501;
  const AttackScenario sc = generate(config);

  DecompositionResult res;
  res.L_star = sc.L_bar;
  res.C_star = sc.C_bar;
  res.C_star.col(4).setConstant(Complex(0.5, 0.0));  // spurious detection
  res.S_star = CMat::Zero(12, 10);
  res.converged = true;

  const DetectionOutcome out = score(sc, res);
  CHECK_FALSE(out.support_exact);
  CHECK_FALSE(out.success);
  CHECK(out.false_alarms == 1);
}

TEST_CASE("unattacked scenarios succeed only with an empty estimate") {
  ScenarioConfig config;
  config.t = 12;
  config.p = 10;
  config.n = 5;
  config.rank = 2;
  config.support_size = 0;
  config.seed = 502;
  const AttackScenario sc = generate(config);
  REQUIRE(sc.support.empty());

  DecompositionResult res;
  res.L_star = sc.L_bar;
  res.C_star = CMat::Zero(12, 5);
  res.S_star = CMat::Zero(12, 10);
  res.converged = true;
  CHECK(score(sc, res).success);

  res.C_star(0, 3) = Complex(1.0, 0.0);
  const DetectionOutcome bad = score(sc, res);
  CHECK_FALSE(bad.success);
  CHECK(bad.false_alarms == 1);
}

TEST_CASE("a rotated column space fails the gap criterion") {
  ScenarioConfig config;
  config.t = 12;
  config.p = 10;
  config.n = 5;
  config.rank = 1;
  config.support_size = 1;
  config.seed = 503;
  const AttackScenario sc = generate(config);

  DecompositionResult res;
  res.L_star = sc.L_bar;
  // Push a noticeable component of the first left direction somewhere new.
  res.L_star.row(0) *= 0.2;
  res.L_star.row(11).setConstant(Complex(5.0, 0.0));
  res.C_star = sc.C_bar;
  res.S_star = CMat::Zero(12, 10);
  res.converged = true;

  const DetectionOutcome out = score(sc, res, 0.002, 0.01);
  CHECK(out.subspace_gap > 0.01);
  CHECK_FALSE(out.success);
}
