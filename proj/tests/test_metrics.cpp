#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dualprox/io.hpp"
#include "dualprox/metrics.hpp"
#include "support/oracles.hpp"

using namespace dualprox;
using namespace dualprox::testing;

TEST_CASE("violation metric") {
  std::mt19937_64 rng(1);
  const ParametricLpInstance inst = random_instance(rng, 3, 5);

  SUBCASE("completed points score zero") {
    const Vec y = random_vec(rng, 3);
    const CompletionOutput c = complete_unregularized(inst, y);
    CHECK(violation_metric(inst, {y, c.zl, c.zu}) <= 1e-12);
  }
  SUBCASE("negative multiplier with clean equality") {
    Matrix A(1, 2);
    A(0, 0) = 1.0;
    A(0, 1) = 1.0;
    const ParametricLpInstance two(A, {1.0}, {0.0, 0.0}, {-1.0, -1.0}, {1.0, 1.0});
    // zl = (-1, 0), zu = 0, c = 0, y = 0: only the bound violation counts
    // plus the equality residual |zl - zu| it induces
    const double v = violation_metric(two, {{0.0}, {-1.0, 0.0}, {0.0, 0.0}});
    CHECK(v == doctest::Approx((1.0 + 1.0) / 2.0));
  }
  SUBCASE("matches a direct summation") {
    const DualPoint dp{random_vec(rng, 3), random_vec(rng, 5), random_vec(rng, 5)};
    const Vec z = reduced_costs(inst, dp.y);
    double want = 0.0;
    for (int j = 0; j < 5; ++j)
      want += neg_part(dp.zl[j]) + neg_part(dp.zu[j]) +
              std::abs(dp.zl[j] - dp.zu[j] - z[j]);
    want /= 5.0;
    CHECK(violation_metric(inst, dp) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("objective gaps") {
  std::mt19937_64 rng(2);
  const ParametricLpInstance inst = random_instance(rng, 3, 5);
  const Vec y = random_vec(rng, 3);
  const CompletionOutput c = complete_unregularized(inst, y);
  const DualPoint dp{y, c.zl, c.zu};
  const double dobj = dual_objective(inst, dp);

  SUBCASE("zero gap at the exact value") {
    CHECK(*objective_gap(inst, dp, dobj) == doctest::Approx(0.0));
  }
  SUBCASE("one percent off") {
    const double lstar = dobj / 0.99;
    if (std::abs(lstar) > 1e-6)
      CHECK(*objective_gap(inst, dp, lstar) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("tiny reference value is excluded, large gaps stay finite") {
    CHECK_FALSE(objective_gap(inst, dp, 0.0).has_value());
    const double wrong_sign = -dobj;
    if (std::abs(dobj) > 1e-6) {
      const auto g = objective_gap(inst, dp, wrong_sign);
      REQUIRE(g.has_value());
      CHECK(*g == doctest::Approx(200.0).epsilon(1e-9));
      CHECK(std::isfinite(*g));
    }
  }
  SUBCASE("gap from y alone equals the full gap for completed points") {
    const double lstar = dobj + 0.5;
    const auto a = objective_gap(inst, dp, lstar);
    const auto b = dual_gap_star(inst, y, lstar);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(*a == doctest::Approx(*b).epsilon(1e-10));
  }
}

TEST_CASE("hand-checked single-variable bound gap") {
  Matrix A(1, 1);
  A(0, 0) = 1.0;
  const ParametricLpInstance inst(A, {0.5}, {1.0}, {0.0}, {1.0});
  // y = 0 completes to zl = 1, zu = 0, bound = 0, optimum 0.5
  const auto g = dual_gap_star(inst, {0.0}, 0.5);
  REQUIRE(g.has_value());
  CHECK(*g == doctest::Approx(100.0));
}

TEST_CASE("oracle-accurate y gives a near-zero gap") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ParametricLpInstance inst = random_instance(rng, 4, 9);
    const SolveResult r = solve_lp(inst);
    REQUIRE(r.status == SolveStatus::Optimal);
    const auto g = dual_gap_star(inst, r.y, r.primal_obj);
    if (!g.has_value()) continue;
    CHECK(*g <= 1e-4);
  }
}

namespace {

// builds a tiny dataset and returns everything the evaluators need
struct EvalFixture {
  Dataset ds;
  ParametricLpInstance proto;
  std::vector<EvalSample> test;

  static EvalFixture make() {
    const std::string text =
        read_text_file(std::string(DUALPROX_CASES_DIR) + "/case3.m");
    Dataset ds = generate_dataset(text, 60, 0.8, 77, true);
    ParametricLpInstance proto = ds.prototype();
    std::vector<EvalSample> test = make_eval_samples(ds, ds.test_idx);
    return {std::move(ds), std::move(proto), std::move(test)};
  }
};

}  // namespace

TEST_CASE("evaluation over a stub predictor") {
  const EvalFixture fx = EvalFixture::make();
  TrainConfig cfg;

  SUBCASE("oracle-replaying predictor scores near zero") {
    // predict the stored optimal duals sample by sample
    const PredictFn oracle_replay = [&](const Matrix& f) {
      Matrix out(f.rows, fx.proto.m());
      for (int s = 0; s < f.rows; ++s) {
        const auto& smp = fx.ds.samples[fx.test[s].id];
        std::copy(smp.ystar.begin(), smp.ystar.end(), out.row(s));
      }
      return out;
    };
    const MetricsRecord rec =
        evaluate_predictions(fx.proto, fx.test, Method::DLL, cfg, oracle_replay);
    CHECK(rec.gstar_mean_pct <= 1e-4);
    CHECK(rec.gstar_max_pct <= 1e-4);
    CHECK(rec.v_mean <= 1e-9);
    CHECK(rec.n_excluded == 0);
  }

  SUBCASE("random model still yields valid bounds and zero violations") {
    MlpModel model =
        MlpModel::create(fx.ds.net.n_bus, 16, fx.ds.m, fx.ds.n, HeadKind::DualY, 123);
    const MetricsRecord rec = evaluate_model(model, fx.proto, fx.test, Method::S3L, cfg);
    for (const auto& s : rec.per_sample) {
      CHECK(s.v_mean <= 1e-9);
      // weak duality: the re-completed bound never exceeds the optimum
      CHECK(s.dual_bound <= s.lstar + 1e-6 * (1.0 + std::abs(s.lstar)));
      CHECK(s.dgap_pct == doctest::Approx(s.gstar_pct).epsilon(1e-10));
    }
    CHECK(rec.gstar_max_pct >= rec.gstar_mean_pct);
  }

  SUBCASE("penalty-headed model reports violations separately") {
    MlpModel model =
        MlpModel::create(fx.ds.net.n_bus, 16, fx.ds.m, fx.ds.n, HeadKind::DualYZlZu, 9);
    const MetricsRecord rec =
        evaluate_model(model, fx.proto, fx.test, Method::Penalty, cfg);
    CHECK(rec.v_mean >= 0.0);
    // an uncompleted random prediction essentially never satisfies equality
    CHECK(rec.v_mean > 1e-6);
    bool dgap_differs = false;
    for (const auto& s : rec.per_sample)
      if (std::abs(s.dgap_pct - s.gstar_pct) > 1e-9) dgap_differs = true;
    CHECK(dgap_differs);
    // the re-completed bound stays valid regardless
    for (const auto& s : rec.per_sample)
      CHECK(s.dual_bound <= s.lstar + 1e-6 * (1.0 + std::abs(s.lstar)));
  }

  SUBCASE("corrected completion method satisfies equality after inference") {
    MlpModel model =
        MlpModel::create(fx.ds.net.n_bus, 16, fx.ds.m, fx.ds.n, HeadKind::DualYZl, 4);
    const MetricsRecord rec = evaluate_model(model, fx.proto, fx.test, Method::DC3, cfg);
    for (const auto& s : rec.per_sample) {
      // only sign violations can remain
      CHECK(s.dual_bound <= s.lstar + 1e-6 * (1.0 + std::abs(s.lstar)));
    }
  }

  SUBCASE("missing oracle data is refused") {
    Dataset no_oracle = generate_dataset(fx.ds.case_text, 10, 0.8, 3, false);
    CHECK_THROWS_AS(make_eval_samples(no_oracle, no_oracle.test_idx), ValidationError);
  }
}

TEST_CASE("per-sample aggregation matches the stored rows") {
  const EvalFixture fx = EvalFixture::make();
  TrainConfig cfg;
  MlpModel model =
      MlpModel::create(fx.ds.net.n_bus, 16, fx.ds.m, fx.ds.n, HeadKind::DualY, 55);
  const MetricsRecord rec = evaluate_model(model, fx.proto, fx.test, Method::DLL, cfg);
  double vsum = 0.0, gsum = 0.0, gmax = 0.0;
  for (const auto& s : rec.per_sample) {
    vsum += s.v_mean;
    gsum += s.gstar_pct;
    gmax = std::max(gmax, s.gstar_pct);
  }
  CHECK(rec.v_mean == doctest::Approx(vsum / rec.per_sample.size()));
  CHECK(rec.gstar_mean_pct == doctest::Approx(gsum / rec.per_sample.size()));
  CHECK(rec.gstar_max_pct == doctest::Approx(gmax));
}
