#pragma once

#include "dualprox/lp.hpp"

namespace dualprox {

// Penalty objective: dual objective minus weight * violation, where the
// violation aggregates the mean smoothed equality residual and the mean
// negative parts. Smoothing |t| ~ sqrt(t^2 + eps^2) keeps it differentiable.
struct PenaltyLossValue {
  double dual_obj = 0.0;
  double violation = 0.0;
  double total = 0.0;
};

struct PenaltyGrads {
  Vec dy, dzl, dzu;  // gradients of total (maximization form)
};

PenaltyLossValue penalty_loss(const ParametricLpInstance& inst, const DualPoint& dp, double weight,
                              PenaltyGrads* grads = nullptr);

// Equality completion used by the correction baseline: the unique zu closing
// A'y + zl - zu = c. May be negative.
Vec dc3_complete(const ParametricLpInstance& inst, const Vec& y, const Vec& zl);

// Unrolled momentum descent on 0.5*||neg(zl)||^2 + 0.5*||neg(zu)||^2 over
// (y, zl), with zu re-derived after every step. The trace stores the sign
// masks needed to backpropagate through the unrolled steps.
struct Dc3Trace {
  Vec y, zl, zu;  // corrected triple
  int steps = 0;
  double lr = 0.0, momentum = 0.0;
  std::vector<std::vector<std::uint8_t>> zl_active;  // zl < 0 per step
  std::vector<std::vector<std::uint8_t>> zu_active;  // zu < 0 per step
};

Dc3Trace dc3_correct(const ParametricLpInstance& inst, const Vec& y, const Vec& zl, const Vec& zu,
                     int steps, double lr, double momentum);

// Pulls gradients at the corrected triple back to the predicted (y, zl).
void dc3_backward(const ParametricLpInstance& inst, const Dc3Trace& trace, const Vec& dy_fin,
                  const Vec& dzl_fin, const Vec& dzu_fin, Vec& dy0, Vec& dzl0);

}  // namespace dualprox
