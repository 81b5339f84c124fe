#include "dualprox/lp.hpp"

#include <algorithm>
#include <cmath>

namespace dualprox {

namespace {

void check_dim(size_t got, size_t want, const char* what) {
  if (got != want)
    throw ValidationError(std::string(what) + ": expected length " + std::to_string(want) +
                          ", got " + std::to_string(got));
}

}  // namespace

ParametricLpInstance::ParametricLpInstance(Matrix A, Vec b, Vec c, Vec l, Vec u) {
  if (A.rows < 1 || A.cols < 1) throw ValidationError("constraint matrix must be at least 1x1");
  m_ = A.rows;
  n_ = A.cols;
  check_dim(b.size(), m_, "b");
  check_dim(c.size(), n_, "c");
  check_dim(l.size(), n_, "l");
  check_dim(u.size(), n_, "u");
  if (!all_finite(A.data) || !all_finite(b) || !all_finite(c) || !all_finite(l) || !all_finite(u))
    throw ValidationError("instance data must be finite");
  for (int j = 0; j < n_; ++j) {
    if (!(l[j] < u[j]))
      throw ValidationError("bounds must satisfy l < u strictly at index " + std::to_string(j));
  }
  for (int i = 0; i < m_; ++i) {
    bool all_zero = true;
    const double* ai = A.row(i);
    for (int j = 0; j < n_; ++j)
      if (ai[j] != 0.0) {
        all_zero = false;
        break;
      }
    if (all_zero) throw ValidationError("constraint row " + std::to_string(i) + " is all zero");
  }
  At_ = std::make_shared<Matrix>(A.transposed());
  A_ = std::make_shared<Matrix>(std::move(A));
  b_ = std::move(b);
  c_ = std::move(c);
  l_ = std::move(l);
  u_ = std::move(u);
  c_inf_ = inf_norm(c_);
}

ParametricLpInstance ParametricLpInstance::with_rhs(Vec b) const {
  check_dim(b.size(), m_, "b");
  if (!all_finite(b)) throw ValidationError("right-hand side must be finite");
  ParametricLpInstance out;
  out.m_ = m_;
  out.n_ = n_;
  out.A_ = A_;
  out.At_ = At_;
  out.b_ = std::move(b);
  out.c_ = c_;
  out.l_ = l_;
  out.u_ = u_;
  out.c_inf_ = c_inf_;
  return out;
}

void reduced_costs(const ParametricLpInstance& inst, const double* y, double* z) {
  const Matrix& At = inst.At();
  const Vec& c = inst.c();
  for (int j = 0; j < inst.n(); ++j) z[j] = c[j] - dot(At.row(j), y, inst.m());
}

Vec reduced_costs(const ParametricLpInstance& inst, const Vec& y) {
  if (static_cast<int>(y.size()) != inst.m()) throw ValidationError("y has wrong length");
  Vec z(inst.n());
  reduced_costs(inst, y.data(), z.data());
  return z;
}

double dual_objective(const ParametricLpInstance& inst, const DualPoint& dp) {
  if (static_cast<int>(dp.y.size()) != inst.m() || static_cast<int>(dp.zl.size()) != inst.n() ||
      static_cast<int>(dp.zu.size()) != inst.n())
    throw ValidationError("dual point dimensions do not match instance");
  return dot(inst.b(), dp.y) + dot(inst.l(), dp.zl) - dot(inst.u(), dp.zu);
}

double primal_objective(const ParametricLpInstance& inst, const Vec& x) {
  if (static_cast<int>(x.size()) != inst.n()) throw ValidationError("x has wrong length");
  return dot(inst.c(), x);
}

ResidualReport dual_residuals(const ParametricLpInstance& inst, const DualPoint& dp) {
  const int n = inst.n();
  ResidualReport r;
  r.eq_residual.resize(n);
  r.zl_neg.resize(n);
  r.zu_neg.resize(n);
  reduced_costs(inst, dp.y.data(), r.eq_residual.data());
  // reduced_costs gives c - A'y, so A'y + zl - zu - c = zl - zu - z.
  double linf = 0.0;
  for (int j = 0; j < n; ++j) {
    r.eq_residual[j] = dp.zl[j] - dp.zu[j] - r.eq_residual[j];
    r.zl_neg[j] = neg_part(dp.zl[j]);
    r.zu_neg[j] = neg_part(dp.zu[j]);
    linf = std::max({linf, std::abs(r.eq_residual[j]), r.zl_neg[j], r.zu_neg[j]});
  }
  r.linf = linf;
  return r;
}

bool is_dual_feasible(const ParametricLpInstance& inst, const DualPoint& dp, double tol) {
  if (tol < 0.0) throw ValidationError("tolerance must be nonnegative");
  return dual_residuals(inst, dp).linf <= tol;
}

}  // namespace dualprox
