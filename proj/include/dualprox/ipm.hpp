#pragma once

#include "dualprox/completion.hpp"

namespace dualprox {

enum class SolveStatus { Optimal, MaxIter, NumericalFailure };

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec x, y, zl, zu;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  // max of relative primal, dual and gap residuals; <= 1e-8 when Optimal
  double kkt_residual = 0.0;
  int iterations = 0;
};

// Primal-dual predictor-corrector solver for the bounded-variable LP. Dense
// normal equations with Cholesky; ground truth at desk scale, not a
// production solver.
SolveResult solve_lp(const ParametricLpInstance& inst);

// Numerical solution of the completion subproblem, coordinate by coordinate.
// This is the oracle the closed forms are tested against: it never calls the
// closed-form kernels.
struct InnerSolution {
  Vec zl, zu;
  double xi = 0.0;
};
InnerSolution solve_inner(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg);
InnerSolution solve_inner_from_z(const Vec& l, const Vec& u, const Vec& z, const Regularizer& reg);

// 1-D inner problem: maximize l*t - u*(t-z) + mu*(ln t + ln(t-z)) over
// t > max(0, z). Bracketing plus fixed-count bisection on the stationarity
// condition, then a safeguarded Newton polish. Returns (zl, zu) = (t, t-z).
std::pair<double, double> solve_inner_1d(double l, double u, double mu, double z);

// Maximizes b'y + xi_mu(y) by damped Newton, using the closed-form gradient.
struct SmoothedDualResult {
  SolveStatus status = SolveStatus::MaxIter;
  Vec y;
  double value = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
};
SmoothedDualResult solve_smoothed_dual(const ParametricLpInstance& inst, double mu);

}  // namespace dualprox
