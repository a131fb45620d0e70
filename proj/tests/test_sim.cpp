#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <doctest.h>

#include "lrcs/detect.hpp"
#include "lrcs/errors.hpp"
#include "lrcs/sim.hpp"
#include "lrcs/solver.hpp"

using namespace lrcs;

namespace {

int numerical_rank(const CMat& m, double tol = 1e-10) {
  const Eigen::JacobiSVD<CMat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

}  // namespace

TEST_CASE("lowrank generator produces the requested rank") {
  SUBCASE("rank zero is the zero matrix") {
    CHECK(gen_synthetic_lowrank(6, 5, 0, 1).norm() == 0.0);
  }
  SUBCASE("numerical rank is exact at desk size") {
    const CMat L = gen_synthetic_lowrank(50, 50, 3, 77);
    const Eigen::JacobiSVD<CMat> svd(L);
    const auto& s = svd.singularValues();
    CHECK(s(2) > 0.0);
    CHECK(s(3) / s(0) < 1e-10);
  }
  SUBCASE("entries are real valued") {
    const CMat L = gen_synthetic_lowrank(8, 9, 2, 5);
    double imag_mass = 0.0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 9; ++j) imag_mass += std::abs(L(i, j).imag());
    CHECK(imag_mass == 0.0);
  }
  SUBCASE("same seed same matrix") {
    const CMat a = gen_synthetic_lowrank(7, 7, 2, 99);
    const CMat b = gen_synthetic_lowrank(7, 7, 2, 99);
    CHECK((a - b).norm() == 0.0);
  }
  SUBCASE("rank above min dimension is rejected") {
    CHECK_THROWS_AS(gen_synthetic_lowrank(4, 6, 5, 1), RankTooLarge);
  }
}

TEST_CASE("attack injection basics") {
  ScenarioConfig config;
  config.t = 20;
  config.p = 16;
  config.n = 8;
  config.rank = 2;
  config.support_size = 2;
  config.seed = 1234;
  const AttackScenario sc = generate(config);

  SUBCASE("support matches the nonzero columns of the attack matrix") {
    std::vector<int> nonzero;
    for (int j = 0; j < config.n; ++j)
      if (sc.C_bar.col(j).norm() > 0.0) nonzero.push_back(j);
    CHECK(nonzero == sc.support);
    CHECK((int)sc.support.size() == 2);
  }

  SUBCASE("attack leaves the clean column space") {
    CMat stacked(sc.L_bar.rows() * 2, sc.L_bar.cols());
    const CMat attacked = sc.L_bar + sc.C_bar * sc.W.transpose();
    stacked << sc.L_bar, attacked;
    CHECK(numerical_rank(stacked) > numerical_rank(sc.L_bar));
  }

  SUBCASE("every attack row lies in the row space of the raw coefficients") {
    const CMat D = sc.C_bar * sc.W.transpose();
    const CMat Wt = sc.tm.w_bar.transpose();
    const auto qr = Wt.transpose().colPivHouseholderQr();
    for (int i = 0; i < D.rows(); ++i) {
      const CVec row = D.row(i).transpose();
      const CVec fit = Wt.transpose() * qr.solve(row);
      CHECK((row - fit).norm() <= 1e-10 * std::max(1.0, row.norm()));
    }
  }

  SUBCASE("measurements assemble from the parts") {
    const CMat assembled =
        sc.L_bar + sc.C_bar * sc.W.transpose() + sc.S_bar + sc.N;
    CHECK((sc.M - assembled).norm() == 0.0);
  }
}

TEST_CASE("empty support is rejected by the injector") {
  const CMat L = gen_synthetic_lowrank(6, 6, 1, 3);
  ScenarioConfig config;
  config.t = 6;
  config.p = 6;
  config.n = 3;
  const TransformMatrix tm = make_transform(config);
  CHECK_THROWS_AS(inject_unobservable(L, tm, {}, {}, 9), EmptySupport);
}

TEST_CASE("attacked channels on a metered network cover the touched rows") {
  GridTopology topo;
  topo.n_buses = 3;
  topo.lines = {{0, 1, Complex(0.1, 0.4), Complex(0.0, 0.02)},
                {0, 2, Complex(0.2, 0.5), Complex(0.0, 0.04)},
                {1, 2, Complex(0.15, 0.45), Complex(0.0, 0.03)}};
  topo.channels = {VoltageChannel{0}, CurrentChannel{0, 1}, CurrentChannel{0, 2},
                   VoltageChannel{1}, CurrentChannel{1, 0}, CurrentChannel{1, 2}};
  const TransformMatrix tm = build_transform(topo);
  const CMat L = gen_synthetic_lowrank(12, 6, 2, 21);
  const AttackScenario sc = inject_unobservable(L, tm, {0, 2}, {1.0, 1.0}, 77);
  const std::vector<int> expected = {0, 1, 2, 4, 5};
  CHECK(sc.attacked_channels == expected);
  CHECK_FALSE(sc.cancellation_detected);
}

TEST_CASE("scattered attack count matches the density exactly") {
  ScenarioConfig config;
  config.t = 50;
  config.p = 50;
  config.n = 10;
  config.rank = 2;
  config.seed = 42;

  SUBCASE("zero density") {
    config.scatter_density = 0.0;
    CHECK(generate(config).S_bar.norm() == 0.0);
  }
  SUBCASE("full density") {
    config.scatter_density = 1.0;
    const AttackScenario sc = generate(config);
    int nonzeros = 0;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j)
        if (std::abs(sc.S_bar(i, j)) > 0.0) ++nonzeros;
    CHECK(nonzeros == 2500);
  }
  SUBCASE("five percent of a 50 by 50 grid is 125 entries") {
    config.scatter_density = 0.05;
    const AttackScenario sc = generate(config);
    int nonzeros = 0;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j)
        if (std::abs(sc.S_bar(i, j)) > 0.0) ++nonzeros;
    CHECK(nonzeros == 125);
  }
}

TEST_CASE("noise level drives the realized budget") {
  ScenarioConfig config;
  config.t = 50;
  config.p = 50;
  config.n = 10;
  config.rank = 2;
  config.seed = 7;

  SUBCASE("no noise means zero budget") {
    const AttackScenario sc = generate(config);
    CHECK(sc.N.norm() == 0.0);
    CHECK(sc.eta == 0.0);
  }
  SUBCASE("budget equals the realized noise norm inside its concentration band") {
    config.sigma = 0.1;
    const AttackScenario sc = generate(config);
    CHECK(sc.eta == sc.N.norm());
    CHECK(sc.eta >= 4.5);
    CHECK(sc.eta <= 5.5);
  }
}

TEST_CASE("observation mask keeps the exact entry count") {
  ScenarioConfig config;
  config.t = 50;
  config.p = 50;
  config.n = 10;
  config.rank = 2;
  config.seed = 8;

  SUBCASE("full observation") {
    CHECK(mask_count(generate(config).omega) == 2500);
  }
  SUBCASE("eighty percent") {
    config.keep_fraction = 0.8;
    CHECK(mask_count(generate(config).omega) == 2000);
  }
}

TEST_CASE("unobserved entries are never consulted by the solver") {
  ScenarioConfig config;
  config.t = 16;
  config.p = 14;
  config.n = 7;
  config.rank = 2;
  config.support_size = 1;
  config.keep_fraction = 0.8;
  config.seed = 314;
  const AttackScenario sc = generate(config);

  ProblemSpec clean = to_problem(sc, 0.95);
  ProblemSpec poisoned = clean;
  for (int i = 0; i < config.t; ++i)
    for (int j = 0; j < config.p; ++j)
      if (!poisoned.omega(i, j))
        poisoned.M(i, j) = Complex(std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::infinity());

  const DecompositionResult a = solve(clean);
  const DecompositionResult b = solve(poisoned);
  CHECK((a.L_star - b.L_star).norm() == 0.0);
  CHECK((a.C_star - b.C_star).norm() == 0.0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("replay from config is bit identical") {
  ScenarioConfig config;
  config.t = 24;
  config.p = 20;
  config.n = 10;
  config.rank = 3;
  config.support_size = 2;
  config.sigma = 0.05;
  config.scatter_density = 0.04;
  config.keep_fraction = 0.9;
  config.seed = 5150;
  const AttackScenario a = generate(config);
  const AttackScenario b = generate(config);
  CHECK((a.M - b.M).norm() == 0.0);
  CHECK((a.L_bar - b.L_bar).norm() == 0.0);
  CHECK((a.C_bar - b.C_bar).norm() == 0.0);
  CHECK((a.S_bar - b.S_bar).norm() == 0.0);
  CHECK(a.eta == b.eta);
  CHECK(a.support == b.support);
  CHECK((a.omega == b.omega).all());
}

TEST_CASE("different seeds give different draws") {
  ScenarioConfig config;
  config.t = 10;
  config.p = 10;
  config.n = 5;
  config.rank = 2;
  config.support_size = 1;
  config.seed = 1;
  const AttackScenario a = generate(config);
  config.seed = 2;
  const AttackScenario b = generate(config);
  CHECK((a.M - b.M).norm() > 0.0);
}

TEST_CASE("measurements do not depend on the solver coordinate scale") {
  ScenarioConfig config;
  config.t = 18;
  config.p = 15;
  config.n = 6;
  config.rank = 2;
  config.support_size = 2;
  config.seed = 404;

  config.w_scale = 1.0;
  const AttackScenario a = generate(config);
  config.w_scale = std::sqrt(2.0);
  const AttackScenario b = generate(config);

  CHECK((a.M - b.M).norm() <= 1e-12 * a.M.norm());
  // The attack expressed against the scaled coefficients compensates exactly.
  const CMat da = a.C_bar * a.W.transpose();
  const CMat db = b.C_bar * b.W.transpose();
  CHECK((da - db).norm() <= 1e-12 * std::max(1.0, da.norm()));
}

TEST_CASE("explicit support wins over the random draw") {
  ScenarioConfig config;
  config.t = 12;
  config.p = 12;
  config.n = 6;
  config.rank = 1;
  config.support = {1, 4};
  config.seed = 11;
  const AttackScenario sc = generate(config);
  CHECK(sc.support == std::vector<int>{1, 4});
}

TEST_CASE("problem spec carries the scenario data unchanged") {
  ScenarioConfig config;
  config.t = 10;
  config.p = 9;
  config.n = 4;
  config.rank = 1;
  config.support_size = 1;
  config.sigma = 0.1;
  config.seed = 3030;
  const AttackScenario sc = generate(config);
  const ProblemSpec spec = to_problem(sc, 0.8, SolveMode::Combined, 1.5, 0.3);
  CHECK((spec.M - sc.M).norm() == 0.0);
  CHECK((spec.W - sc.W).norm() == 0.0);
  CHECK(spec.eta == sc.eta);
  CHECK(spec.lambda == 0.8);
  CHECK(spec.lambda1 == 1.5);
  CHECK(spec.lambda2 == 0.3);
  CHECK(spec.mode == SolveMode::Combined);
}
