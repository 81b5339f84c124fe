#pragma once

#include "dualprox/lp.hpp"

namespace dualprox {

enum class RegKind { None, LogBarrier };

// Concave regularizer weight. mu == 0 iff kind == None.
struct Regularizer {
  RegKind kind = RegKind::None;
  double mu = 0.0;

  static Regularizer none() { return {RegKind::None, 0.0}; }
  static Regularizer log_barrier(double mu);
};

// Result of completing a predicted y into a full dual point, together with
// the recovered primal point and the inner optimal value xi.
struct CompletionOutput {
  Vec zl, zu;
  Vec x;
  double xi = 0.0;
};

// Unregularized completion: zl/zu are the positive/negative parts of the
// reduced costs, x snaps to the active bound (midpoint on ties).
CompletionOutput complete_unregularized(const ParametricLpInstance& inst, const Vec& y);

// Log-barrier completion, all element-wise closed forms. Strictly interior:
// zl, zu > 0 and l < x < u.
CompletionOutput complete_log_barrier(const ParametricLpInstance& inst, const Vec& y, double mu);

CompletionOutput complete(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg);

// Optimal value of the completion subproblem for fixed y.
double inner_value(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg);

// Batched completion: one instance, many y rows. Row s of each output matrix
// is the completion of Y.row(s). Bitwise deterministic for any thread count.
struct BatchCompletion {
  Matrix zl, zu, x;  // batch x n
  Vec xi;            // batch
};
BatchCompletion complete_batch(const ParametricLpInstance& inst, const Matrix& Y,
                               const Regularizer& reg);
BatchCompletion complete_batch_serial(const ParametricLpInstance& inst, const Matrix& Y,
                                      const Regularizer& reg);

// Raw kernels operating on precomputed reduced costs; used by the batched
// paths and by the benchmark that isolates completion cost.
void complete_kernel_unreg(int n, const double* l, const double* u, const double* z,
                           double tie_tol, double* zl, double* zu, double* x, double* xi);
void complete_kernel_log(int n, const double* l, const double* u, const double* z, double mu,
                         double z_tol, double* zl, double* zu, double* x, double* xi);

// Checks that the barrier completion converges to the unregularized one as mu
// decreases. Deviation at step k covers zl, zu and the de-regularized xi.
struct LimitReport {
  std::vector<double> mu;
  std::vector<double> deviation;
  bool monotone = false;  // non-increasing up to 10% slack
  double final_deviation = 0.0;
};
LimitReport limit_consistency_check(const ParametricLpInstance& inst, const Vec& y,
                                    const std::vector<double>& mu_sequence);

}  // namespace dualprox
