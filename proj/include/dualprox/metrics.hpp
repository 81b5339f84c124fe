#pragma once

#include <functional>
#include <optional>

#include "dualprox/mlp.hpp"

namespace dualprox {

// Mean over coordinates of |zl|^- + |zu|^- + |A'y + zl - zu - c|.
double violation_metric(const ParametricLpInstance& inst, const DualPoint& dp);

// 100 |L* - dual_obj| / |L*|. Empty when |L*| is too small to divide by.
std::optional<double> objective_gap(const ParametricLpInstance& inst, const DualPoint& dp,
                                    double lstar);

// Gap of the valid bound obtained by re-completing from y alone.
std::optional<double> dual_gap_star(const ParametricLpInstance& inst, const Vec& y, double lstar);

struct SampleMetrics {
  int id = 0;
  double v_mean = 0.0, v_sum = 0.0, v_linf = 0.0;
  double dgap_pct = 0.0;
  double gstar_pct = 0.0;
  double lstar = 0.0;
  double dual_bound = 0.0;  // b'y + xi_0(y), always a valid lower bound
  bool excluded = false;    // |L*| below the divisible threshold
};

struct MetricsRecord {
  double v_mean = 0.0;
  double dgap_mean_pct = 0.0;
  double gstar_mean_pct = 0.0;
  double gstar_max_pct = 0.0;
  int n_excluded = 0;
  std::vector<SampleMetrics> per_sample;
};

struct EvalSample {
  int id = 0;
  Vec beta;
  Vec rhs;
  double lstar = 0.0;
};

// Predictor: raw feature rows in, head-output rows out.
using PredictFn = std::function<Matrix(const Matrix&)>;

// Runs the method's full inference path on every sample (completion for the
// dual-completion methods, equality completion plus correction for DC3, raw
// heads for the penalty method) and aggregates the metrics.
MetricsRecord evaluate_predictions(const ParametricLpInstance& proto,
                                   const std::vector<EvalSample>& samples, Method method,
                                   const TrainConfig& cfg, const PredictFn& predict);

MetricsRecord evaluate_model(const MlpModel& model, const ParametricLpInstance& proto,
                             const std::vector<EvalSample>& samples, Method method,
                             const TrainConfig& cfg);

}  // namespace dualprox
