#pragma once

#include <memory>

#include "dualprox/matrix.hpp"

namespace dualprox {

// Bounded-variable LP in equality standard form:
//
//   min  c'x   s.t.  A x = b,  l <= x <= u            (primal)
//   max  b'y + l'zl - u'zu
//        s.t.  A'y + zl - zu = c,  zl, zu >= 0        (dual)
//
// Bounds are finite with l < u strictly. A and its cached transpose are
// shared between instances that differ only in the right-hand side, which is
// how parametric families are represented.
class ParametricLpInstance {
 public:
  ParametricLpInstance(Matrix A, Vec b, Vec c, Vec l, Vec u);

  // Same constraint matrix and costs/bounds, new right-hand side.
  ParametricLpInstance with_rhs(Vec b) const;

  int m() const { return m_; }
  int n() const { return n_; }
  const Matrix& A() const { return *A_; }
  const Matrix& At() const { return *At_; }
  const Vec& b() const { return b_; }
  const Vec& c() const { return c_; }
  const Vec& l() const { return l_; }
  const Vec& u() const { return u_; }

  double c_inf_norm() const { return c_inf_; }

 private:
  ParametricLpInstance() = default;

  int m_ = 0, n_ = 0;
  std::shared_ptr<const Matrix> A_;
  std::shared_ptr<const Matrix> At_;
  Vec b_, c_, l_, u_;
  double c_inf_ = 0.0;
};

// Candidate dual solution. May be infeasible; feasibility is a query, not an
// invariant (some training methods emit infeasible points).
struct DualPoint {
  Vec y, zl, zu;
};

struct ResidualReport {
  Vec eq_residual;  // A'y + zl - zu - c
  Vec zl_neg;       // negative parts of zl
  Vec zu_neg;
  double linf = 0.0;  // max abs over all three blocks
};

Vec reduced_costs(const ParametricLpInstance& inst, const Vec& y);
void reduced_costs(const ParametricLpInstance& inst, const double* y, double* z);

double dual_objective(const ParametricLpInstance& inst, const DualPoint& dp);
double primal_objective(const ParametricLpInstance& inst, const Vec& x);

ResidualReport dual_residuals(const ParametricLpInstance& inst, const DualPoint& dp);
bool is_dual_feasible(const ParametricLpInstance& inst, const DualPoint& dp, double tol);

}  // namespace dualprox
