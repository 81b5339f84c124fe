#include "dualprox/baselines.hpp"

#include <cmath>

namespace dualprox {

namespace {

constexpr double kSmoothEps = 1e-8;

inline double smooth_abs(double t) { return std::sqrt(t * t + kSmoothEps * kSmoothEps); }
inline double smooth_abs_d(double t) { return t / smooth_abs(t); }

// smoothed negative part: (|t| - t)/2
inline double smooth_neg(double t) { return 0.5 * (smooth_abs(t) - t); }
inline double smooth_neg_d(double t) { return 0.5 * (smooth_abs_d(t) - 1.0); }

}  // namespace

PenaltyLossValue penalty_loss(const ParametricLpInstance& inst, const DualPoint& dp, double weight,
                              PenaltyGrads* grads) {
  if (weight < 0.0) throw ValidationError("penalty weight must be nonnegative");
  const int m = inst.m(), n = inst.n();
  if (static_cast<int>(dp.y.size()) != m || static_cast<int>(dp.zl.size()) != n ||
      static_cast<int>(dp.zu.size()) != n)
    throw ValidationError("dual point dimensions do not match instance");

  Vec z(n);
  reduced_costs(inst, dp.y.data(), z.data());

  PenaltyLossValue out;
  out.dual_obj = dot(inst.b(), dp.y) + dot(inst.l(), dp.zl) - dot(inst.u(), dp.zu);

  // residual r = A'y + zl - zu - c = zl - zu - z
  double viol = 0.0;
  Vec dr(n);
  for (int j = 0; j < n; ++j) {
    const double r = dp.zl[j] - dp.zu[j] - z[j];
    viol += smooth_abs(r) + smooth_neg(dp.zl[j]) + smooth_neg(dp.zu[j]);
    dr[j] = smooth_abs_d(r);
  }
  out.violation = viol / n;
  out.total = out.dual_obj - weight * out.violation;

  if (grads) {
    grads->dy.assign(m, 0.0);
    grads->dzl.assign(n, 0.0);
    grads->dzu.assign(n, 0.0);
    // d viol / dy = -A * dr / n  (via dz/dy = -A')
    Vec adr(m);
    matvec_serial(inst.A(), dr.data(), adr.data());
    const double wn = weight / n;
    for (int i = 0; i < m; ++i) grads->dy[i] = inst.b()[i] - wn * adr[i];
    for (int j = 0; j < n; ++j) {
      grads->dzl[j] = inst.l()[j] - wn * (dr[j] + smooth_neg_d(dp.zl[j]));
      grads->dzu[j] = -inst.u()[j] - wn * (-dr[j] + smooth_neg_d(dp.zu[j]));
    }
  }
  return out;
}

Vec dc3_complete(const ParametricLpInstance& inst, const Vec& y, const Vec& zl) {
  const int n = inst.n();
  if (static_cast<int>(y.size()) != inst.m() || static_cast<int>(zl.size()) != n)
    throw ValidationError("dc3_complete dimension mismatch");
  Vec zu(n);
  reduced_costs(inst, y.data(), zu.data());  // zu = c - A'y for now
  for (int j = 0; j < n; ++j) zu[j] = zl[j] - zu[j];
  return zu;
}

Dc3Trace dc3_correct(const ParametricLpInstance& inst, const Vec& y, const Vec& zl, const Vec& zu,
                     int steps, double lr, double momentum) {
  if (steps < 0) throw ValidationError("correction steps must be nonnegative");
  const int m = inst.m(), n = inst.n();
  (void)zu;  // the completed value is re-derived; the argument documents intent

  Dc3Trace tr;
  tr.y = y;
  tr.zl = zl;
  tr.steps = steps;
  tr.lr = lr;
  tr.momentum = momentum;
  tr.zl_active.reserve(steps);
  tr.zu_active.reserve(steps);

  Vec buf_y(m, 0.0), buf_zl(n, 0.0), gy(m), gzl(n), nzu(n), cur_zu(n);
  for (int k = 0; k < steps; ++k) {
    cur_zu = dc3_complete(inst, tr.y, tr.zl);
    std::vector<std::uint8_t> mzl(n), mzu(n);
    for (int j = 0; j < n; ++j) {
      mzl[j] = tr.zl[j] < 0.0;
      mzu[j] = cur_zu[j] < 0.0;
      nzu[j] = neg_part(cur_zu[j]);
    }
    tr.zl_active.push_back(std::move(mzl));
    tr.zu_active.push_back(std::move(mzu));

    // gradient of 0.5||neg(zl)||^2 + 0.5||neg(zu)||^2 w.r.t. (y, zl)
    matvec_serial(inst.A(), nzu.data(), gy.data());
    for (int i = 0; i < m; ++i) gy[i] = -gy[i];
    for (int j = 0; j < n; ++j) gzl[j] = -neg_part(tr.zl[j]) - nzu[j];

    for (int i = 0; i < m; ++i) {
      buf_y[i] = momentum * buf_y[i] + gy[i];
      tr.y[i] -= lr * buf_y[i];
    }
    for (int j = 0; j < n; ++j) {
      buf_zl[j] = momentum * buf_zl[j] + gzl[j];
      tr.zl[j] -= lr * buf_zl[j];
    }
  }
  tr.zu = dc3_complete(inst, tr.y, tr.zl);
  return tr;
}

void dc3_backward(const ParametricLpInstance& inst, const Dc3Trace& trace, const Vec& dy_fin,
                  const Vec& dzl_fin, const Vec& dzu_fin, Vec& dy0, Vec& dzl0) {
  const int m = inst.m(), n = inst.n();
  Vec ybar = dy_fin, zlbar = dzl_fin;
  Vec bybar(m, 0.0), bzlbar(n, 0.0);
  Vec zubar(n), tmp_m(m), tmp_n(n);

  // fold the final completion zu = A'y + zl - c
  matvec_serial(inst.A(), dzu_fin.data(), tmp_m.data());
  for (int i = 0; i < m; ++i) ybar[i] += tmp_m[i];
  for (int j = 0; j < n; ++j) zlbar[j] += dzu_fin[j];

  for (int k = trace.steps - 1; k >= 0; --k) {
    // y_{k+1} = y_k - lr * buf_{k+1}; buf_{k+1} = mom * buf_k + g_k
    for (int i = 0; i < m; ++i) bybar[i] -= trace.lr * ybar[i];
    for (int j = 0; j < n; ++j) bzlbar[j] -= trace.lr * zlbar[j];

    // g_k flows from buf adjoints; buf_k adjoint picks up the momentum factor
    const Vec gybar = bybar;
    const Vec gzlbar = bzlbar;
    for (int i = 0; i < m; ++i) bybar[i] *= trace.momentum;
    for (int j = 0; j < n; ++j) bzlbar[j] *= trace.momentum;

    const auto& mzl = trace.zl_active[k];
    const auto& mzu = trace.zu_active[k];

    // gy_k = -A neg(zu_k): zu adjoint += A' gybar masked to active coords
    mat_t_vec(inst.A(), gybar.data(), tmp_n.data());
    for (int j = 0; j < n; ++j) zubar[j] = mzu[j] ? tmp_n[j] : 0.0;
    // gzl_k = -neg(zl_k) - neg(zu_k)
    for (int j = 0; j < n; ++j) {
      if (mzl[j]) zlbar[j] += gzlbar[j];
      if (mzu[j]) zubar[j] += gzlbar[j];
    }
    // zu_k = A'y_k + zl_k - c
    matvec_serial(inst.A(), zubar.data(), tmp_m.data());
    for (int i = 0; i < m; ++i) ybar[i] += tmp_m[i];
    for (int j = 0; j < n; ++j) zlbar[j] += zubar[j];
  }
  dy0 = ybar;
  dzl0 = zlbar;
}

}  // namespace dualprox
