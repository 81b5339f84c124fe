#include "dualprox/metrics.hpp"

#include <cmath>

#include "dualprox/baselines.hpp"
#include "dualprox/completion.hpp"

namespace dualprox {

double violation_metric(const ParametricLpInstance& inst, const DualPoint& dp) {
  const ResidualReport r = dual_residuals(inst, dp);
  double s = 0.0;
  for (int j = 0; j < inst.n(); ++j)
    s += r.zl_neg[j] + r.zu_neg[j] + std::abs(r.eq_residual[j]);
  return s / inst.n();
}

namespace {

bool lstar_usable(const ParametricLpInstance& inst, double lstar) {
  const double scale = 1.0 + inf_norm(inst.b()) + inst.c_inf_norm();
  return std::abs(lstar) >= 1e-9 * scale;
}

}  // namespace

std::optional<double> objective_gap(const ParametricLpInstance& inst, const DualPoint& dp,
                                    double lstar) {
  if (!lstar_usable(inst, lstar)) return std::nullopt;
  return 100.0 * std::abs(lstar - dual_objective(inst, dp)) / std::abs(lstar);
}

std::optional<double> dual_gap_star(const ParametricLpInstance& inst, const Vec& y, double lstar) {
  if (!lstar_usable(inst, lstar)) return std::nullopt;
  const CompletionOutput c = complete_unregularized(inst, y);
  const double bound = dot(inst.b(), y) + c.xi;
  return 100.0 * std::abs(lstar - bound) / std::abs(lstar);
}

MetricsRecord evaluate_predictions(const ParametricLpInstance& proto,
                                   const std::vector<EvalSample>& samples, Method method,
                                   const TrainConfig& cfg, const PredictFn& predict) {
  const int count = static_cast<int>(samples.size());
  if (count == 0) throw ValidationError("evaluation set is empty");
  const int m = proto.m(), n = proto.n();

  Matrix features(count, static_cast<int>(samples[0].beta.size()));
  for (int s = 0; s < count; ++s) {
    if (samples[s].beta.size() != static_cast<size_t>(features.cols))
      throw ValidationError("inconsistent feature widths in evaluation set");
    std::copy(samples[s].beta.begin(), samples[s].beta.end(), features.row(s));
  }
  const Matrix out = predict(features);

  MetricsRecord rec;
  rec.per_sample.resize(count);

#pragma omp parallel for schedule(static) if (count > 1)
  for (int s = 0; s < count; ++s) {
    const ParametricLpInstance inst = proto.with_rhs(samples[s].rhs);
    DualPoint dp;
    dp.y.assign(out.row(s), out.row(s) + m);
    switch (method) {
      case Method::S3L:
      case Method::DLL: {
        const CompletionOutput c = complete_unregularized(inst, dp.y);
        dp.zl = c.zl;
        dp.zu = c.zu;
        break;
      }
      case Method::DC3: {
        Vec zl(out.row(s) + m, out.row(s) + m + n);
        Vec zu = dc3_complete(inst, dp.y, zl);
        Dc3Trace tr =
            dc3_correct(inst, dp.y, zl, zu, cfg.dc3_steps, cfg.dc3_lr, cfg.dc3_momentum);
        dp.y = tr.y;
        dp.zl = tr.zl;
        dp.zu = tr.zu;
        break;
      }
      case Method::Penalty: {
        dp.zl.assign(out.row(s) + m, out.row(s) + m + n);
        dp.zu.assign(out.row(s) + m + n, out.row(s) + m + 2 * n);
        break;
      }
    }

    SampleMetrics& sm = rec.per_sample[s];
    sm.id = samples[s].id;
    sm.lstar = samples[s].lstar;

    const ResidualReport r = dual_residuals(inst, dp);
    double vsum = 0.0;
    for (int j = 0; j < n; ++j) vsum += r.zl_neg[j] + r.zu_neg[j] + std::abs(r.eq_residual[j]);
    sm.v_sum = vsum;
    sm.v_mean = vsum / n;
    sm.v_linf = r.linf;

    const CompletionOutput c0 = complete_unregularized(inst, dp.y);
    sm.dual_bound = dot(inst.b(), dp.y) + c0.xi;

    const auto dg = objective_gap(inst, dp, samples[s].lstar);
    const auto gs = dual_gap_star(inst, dp.y, samples[s].lstar);
    if (!dg || !gs) {
      sm.excluded = true;
    } else {
      sm.dgap_pct = *dg;
      sm.gstar_pct = *gs;
    }
  }

  double vsum = 0.0, dgsum = 0.0, gssum = 0.0, gsmax = 0.0;
  int included = 0;
  for (const auto& sm : rec.per_sample) {
    vsum += sm.v_mean;
    if (sm.excluded) {
      ++rec.n_excluded;
      continue;
    }
    ++included;
    dgsum += sm.dgap_pct;
    gssum += sm.gstar_pct;
    gsmax = std::max(gsmax, sm.gstar_pct);
  }
  rec.v_mean = vsum / count;
  if (included > 0) {
    rec.dgap_mean_pct = dgsum / included;
    rec.gstar_mean_pct = gssum / included;
    rec.gstar_max_pct = gsmax;
  }
  return rec;
}

MetricsRecord evaluate_model(const MlpModel& model, const ParametricLpInstance& proto,
                             const std::vector<EvalSample>& samples, Method method,
                             const TrainConfig& cfg) {
  return evaluate_predictions(proto, samples, method, cfg,
                              [&](const Matrix& f) { return mlp_forward(model, f, nullptr); });
}

}  // namespace dualprox
