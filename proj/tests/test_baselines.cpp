#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dualprox/baselines.hpp"
#include "dualprox/completion.hpp"
#include "support/oracles.hpp"

using namespace dualprox;
using namespace dualprox::testing;

TEST_CASE("penalty loss values") {
  std::mt19937_64 rng(1);
  const ParametricLpInstance inst = random_instance(rng, 3, 5);

  SUBCASE("feasible point has (numerically) zero violation") {
    const Vec y = random_vec(rng, 3);
    const CompletionOutput c = complete_unregularized(inst, y);
    const PenaltyLossValue v = penalty_loss(inst, {y, c.zl, c.zu}, 10.0);
    CHECK(v.violation <= 1e-7);
    CHECK(v.total == doctest::Approx(v.dual_obj).epsilon(1e-6));
  }

  SUBCASE("zero point against c = (2, -2)") {
    Matrix A(1, 2);
    A(0, 0) = 1.0;
    A(0, 1) = 1.0;
    const ParametricLpInstance two(A, {1.0}, {2.0, -2.0}, {0.0, 0.0}, {1.0, 1.0});
    const PenaltyLossValue v =
        penalty_loss(two, {{0.0}, {0.0, 0.0}, {0.0, 0.0}}, 1.0);
    CHECK(v.violation == doctest::Approx(2.0).epsilon(1e-7));
  }

  SUBCASE("negative weight is rejected") {
    CHECK_THROWS_AS(
        penalty_loss(inst, {Vec(3, 0.0), Vec(5, 0.0), Vec(5, 0.0)}, -1.0),
        ValidationError);
  }
}

TEST_CASE("penalty gradients match finite differences") {
  std::mt19937_64 rng(2);
  const ParametricLpInstance inst = random_instance(rng, 4, 6);
  DualPoint dp{random_vec(rng, 4), random_vec(rng, 6), random_vec(rng, 6)};
  // keep multipliers away from the smoothing kink at zero
  for (double& v : dp.zl) v += v > 0 ? 0.5 : -0.5;
  for (double& v : dp.zu) v += v > 0 ? 0.5 : -0.5;
  const double weight = 7.5;

  PenaltyGrads g;
  penalty_loss(inst, dp, weight, &g);

  const auto value = [&](const DualPoint& p) { return penalty_loss(inst, p, weight).total; };
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    DualPoint p = dp;
    p.y[i] += h;
    const double fp = value(p);
    p.y[i] -= 2 * h;
    const double fm = value(p);
    const double fd = (fp - fm) / (2 * h);
    CHECK(std::abs(fd - g.dy[i]) <= 1e-5 * (1.0 + std::abs(g.dy[i])));
  }
  for (int j = 0; j < 6; ++j) {
    DualPoint p = dp;
    p.zl[j] = dp.zl[j] + h;
    const double fp_l = value(p);
    p.zl[j] = dp.zl[j] - h;
    const double fm_l = value(p);
    const double fd_l = (fp_l - fm_l) / (2 * h);
    CHECK(std::abs(fd_l - g.dzl[j]) <= 1e-5 * (1.0 + std::abs(g.dzl[j])));

    p = dp;
    p.zu[j] = dp.zu[j] + h;
    const double fp_u = value(p);
    p.zu[j] = dp.zu[j] - h;
    const double fm_u = value(p);
    const double fd_u = (fp_u - fm_u) / (2 * h);
    CHECK(std::abs(fd_u - g.dzu[j]) <= 1e-5 * (1.0 + std::abs(g.dzu[j])));
  }
}

TEST_CASE("penalty gradient is linear in the weight") {
  std::mt19937_64 rng(3);
  const ParametricLpInstance inst = random_instance(rng, 3, 5);
  const DualPoint dp{random_vec(rng, 3), random_vec(rng, 5), random_vec(rng, 5)};
  PenaltyGrads g0, g1, g2;
  penalty_loss(inst, dp, 0.0, &g0);
  penalty_loss(inst, dp, 3.0, &g1);
  penalty_loss(inst, dp, 6.0, &g2);
  for (int i = 0; i < 3; ++i) {
    const double viol_part1 = g0.dy[i] - g1.dy[i];
    const double viol_part2 = g0.dy[i] - g2.dy[i];
    CHECK(viol_part2 == doctest::Approx(2.0 * viol_part1).epsilon(1e-10));
  }
}

TEST_CASE("equality completion closes the dual constraint") {
  std::mt19937_64 rng(4);
  const ParametricLpInstance inst = random_instance(rng, 4, 7);

  SUBCASE("positive-part start splits cleanly at y = 0") {
    Vec zl(7);
    for (int j = 0; j < 7; ++j) zl[j] = pos_part(inst.c()[j]);
    const Vec zu = dc3_complete(inst, Vec(4, 0.0), zl);
    for (int j = 0; j < 7; ++j) {
      CHECK(zu[j] == doctest::Approx(neg_part(inst.c()[j])).epsilon(1e-14));
      CHECK(zu[j] >= -1e-15);
    }
  }

  SUBCASE("zero multipliers expose infeasibility coordinatewise") {
    Matrix A(1, 2);
    A(0, 0) = 1.0;
    A(0, 1) = 1.0;
    const ParametricLpInstance two(A, {1.0}, {1.0, -1.0}, {0.0, 0.0}, {1.0, 1.0});
    const Vec zu = dc3_complete(two, {0.0}, {0.0, 0.0});
    CHECK(zu[0] == doctest::Approx(-1.0));
    CHECK(zu[1] == doctest::Approx(1.0));
  }

  SUBCASE("identity holds for random inputs") {
    const Vec y = random_vec(rng, 4);
    const Vec zl = random_vec(rng, 7);
    const Vec zu = dc3_complete(inst, y, zl);
    const Vec z = reduced_costs(inst, y);
    for (int j = 0; j < 7; ++j) CHECK(std::abs(zl[j] - zu[j] - z[j]) <= 1e-12);
  }
}

TEST_CASE("correction loop") {
  std::mt19937_64 rng(5);
  const ParametricLpInstance inst = random_instance(rng, 3, 5);

  const auto violation_sq = [&](const Vec& zl, const Vec& zu) {
    double s = 0.0;
    for (double v : zl) s += neg_part(v) * neg_part(v);
    for (double v : zu) s += neg_part(v) * neg_part(v);
    return 0.5 * s;
  };

  SUBCASE("zero steps is the identity") {
    const Vec y = random_vec(rng, 3);
    const Vec zl = random_vec(rng, 5);
    const Vec zu = dc3_complete(inst, y, zl);
    const Dc3Trace tr = dc3_correct(inst, y, zl, zu, 0, 1e-2, 0.5);
    CHECK(tr.y == y);
    CHECK(tr.zl == zl);
    CHECK(tr.zu == zu);
  }

  SUBCASE("feasible input is a fixed point") {
    const Vec y = random_vec(rng, 3);
    const CompletionOutput c = complete_unregularized(inst, y);
    Vec zl = c.zl;
    for (double& v : zl) v += 0.1;  // strictly positive, still feasible after completion
    const Vec zu = dc3_complete(inst, y, zl);
    REQUIRE(violation_sq(zl, zu) == 0.0);
    const Dc3Trace tr = dc3_correct(inst, y, zl, zu, 10, 1e-2, 0.5);
    CHECK(tr.y == y);
    CHECK(tr.zl == zl);
  }

  SUBCASE("violation decreases monotonically on a 1-D instance") {
    Matrix A(1, 1);
    A(0, 0) = 1.0;
    const ParametricLpInstance one(A, {0.0}, {1.0}, {0.0}, {1.0});
    // y chosen so the completed zu starts at -1
    Vec y{0.0}, zl{0.0};
    Vec zu = dc3_complete(one, y, zl);
    REQUIRE(zu[0] == doctest::Approx(-1.0));
    double prev = violation_sq(zl, zu);
    for (int k = 1; k <= 10; ++k) {
      const Dc3Trace tr = dc3_correct(one, y, zl, zu, k, 1e-2, 0.5);
      const double cur = violation_sq(tr.zl, tr.zu);
      CHECK(cur < prev);
      prev = cur;
    }
  }

  SUBCASE("corrected points satisfy the equality row tightly") {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec y = random_vec(rng, 3);
      Vec zl = random_vec(rng, 5);
      const Vec zu = dc3_complete(inst, y, zl);
      const Dc3Trace tr = dc3_correct(inst, y, zl, zu, 10, 1e-2, 0.5);
      const Vec z = reduced_costs(inst, tr.y);
      for (int j = 0; j < 5; ++j)
        CHECK(std::abs(tr.zl[j] - tr.zu[j] - z[j]) <= 1e-10 * (1.0 + std::abs(z[j])));
    }
  }
}

TEST_CASE("backpropagation through the unrolled correction") {
  std::mt19937_64 rng(6);
  const ParametricLpInstance inst = random_instance(rng, 3, 4);
  const double weight = 5.0;
  const int steps = 10;
  const double lr = 1e-2, momentum = 0.5;

  // scalar objective: penalty total at the corrected triple
  const auto objective = [&](const Vec& y, const Vec& zl) {
    const Vec zu = dc3_complete(inst, y, zl);
    const Dc3Trace tr = dc3_correct(inst, y, zl, zu, steps, lr, momentum);
    return penalty_loss(inst, {tr.y, tr.zl, tr.zu}, weight).total;
  };

  for (int trial = 0; trial < 8; ++trial) {
    const Vec y = random_vec(rng, 3);
    const Vec zl = random_vec(rng, 4);
    const Vec zu = dc3_complete(inst, y, zl);
    const Dc3Trace tr = dc3_correct(inst, y, zl, zu, steps, lr, momentum);

    PenaltyGrads pg;
    penalty_loss(inst, {tr.y, tr.zl, tr.zu}, weight, &pg);
    Vec dy0, dzl0;
    dc3_backward(inst, tr, pg.dy, pg.dzl, pg.dzu, dy0, dzl0);

    // the unrolled map is piecewise smooth; a kink inside the stencil makes
    // the central difference meaningless, so count agreements instead of
    // requiring all coordinates to match
    const double h = 1e-7;
    int matched = 0, total = 0;
    for (int i = 0; i < 3; ++i) {
      Vec yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      const double fd = (objective(yp, zl) - objective(ym, zl)) / (2 * h);
      ++total;
      if (std::abs(fd - dy0[i]) <= 1e-4 * (1.0 + std::abs(dy0[i]))) ++matched;
    }
    for (int j = 0; j < 4; ++j) {
      Vec zp = zl, zm = zl;
      zp[j] += h;
      zm[j] -= h;
      const double fd = (objective(y, zp) - objective(y, zm)) / (2 * h);
      ++total;
      if (std::abs(fd - dzl0[j]) <= 1e-4 * (1.0 + std::abs(dzl0[j]))) ++matched;
    }
    CHECK(matched >= total - 1);
  }
}
