#pragma once

#include "dualprox/completion.hpp"

namespace dualprox {

// Training loss at the completed point. total = dual_obj + barrier, and also
// total = b'y + xi(y); the trainer maximizes total.
struct LossValue {
  double total = 0.0;
  double dual_obj = 0.0;
  double barrier = 0.0;  // mu * Phi, zero when unregularized
};

LossValue s3l_loss(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg);

// Closed-form gradient b - A x(y). For mu = 0 this is the supergradient
// induced by the midpoint tie-break in the completion.
Vec s3l_grad_y(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg);

// Central-difference verification of s3l_grad_y. Returns the max relative
// error over checked coordinates. For mu = 0, coordinates close enough to a
// kink that the difference stencil straddles it are excluded.
double finite_difference_check(const ParametricLpInstance& inst, const Vec& y,
                               const Regularizer& reg, double h);

// Batched loss/gradient for training: one shared (A, c, l, u), per-sample
// right-hand sides. Row s of grads is b_s - A x(y_s); losses[s] is the
// maximization-form loss. Deterministic for any thread count.
void batch_loss_grad(const ParametricLpInstance& proto, const Matrix& rhs, const Matrix& Y,
                     const Regularizer& reg, Vec& losses, Matrix& grads);
void batch_loss_grad_serial(const ParametricLpInstance& proto, const Matrix& rhs, const Matrix& Y,
                            const Regularizer& reg, Vec& losses, Matrix& grads);

}  // namespace dualprox
