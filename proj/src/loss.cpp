#include "dualprox/loss.hpp"

#include <cmath>

namespace dualprox {

LossValue s3l_loss(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg) {
  const CompletionOutput c = complete(inst, y, reg);
  LossValue v;
  v.dual_obj = dot(inst.b(), y) + dot(inst.l(), c.zl) - dot(inst.u(), c.zu);
  if (reg.kind == RegKind::LogBarrier) {
    double logs = 0.0;
    for (int j = 0; j < inst.n(); ++j) logs += std::log(c.zl[j]) + std::log(c.zu[j]);
    v.barrier = reg.mu * logs;
  }
  v.total = v.dual_obj + v.barrier;
  return v;
}

Vec s3l_grad_y(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg) {
  const CompletionOutput c = complete(inst, y, reg);
  Vec g(inst.m());
  matvec_serial(inst.A(), c.x.data(), g.data());
  for (int i = 0; i < inst.m(); ++i) g[i] = inst.b()[i] - g[i];
  return g;
}

double finite_difference_check(const ParametricLpInstance& inst, const Vec& y,
                               const Regularizer& reg, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  const Vec g = s3l_grad_y(inst, y, reg);
  const int m = inst.m();

  // Row-sum norm of A bounds how far a kink can move per unit step in y.
  double a_inf = 0.0;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < inst.n(); ++j) s += std::abs(inst.A()(i, j));
    a_inf = std::max(a_inf, s);
  }

  Vec z;
  if (reg.kind == RegKind::None) z = reduced_costs(inst, y);

  double max_rel = 0.0;
  Vec yp = y, ym = y;
  for (int i = 0; i < m; ++i) {
    const double hi = h * (1.0 + std::abs(y[i]));
    if (reg.kind == RegKind::None) {
      bool near_kink = false;
      for (double zj : z)
        if (std::abs(zj) < 10.0 * hi * a_inf) near_kink = true;
      if (near_kink) continue;
    }
    yp[i] = y[i] + hi;
    ym[i] = y[i] - hi;
    const double fd = (s3l_loss(inst, yp, reg).total - s3l_loss(inst, ym, reg).total) / (2.0 * hi);
    yp[i] = y[i];
    ym[i] = y[i];
    max_rel = std::max(max_rel, std::abs(fd - g[i]) / (1.0 + std::abs(g[i])));
  }
  return max_rel;
}

namespace {

void batch_impl(const ParametricLpInstance& proto, const Matrix& rhs, const Matrix& Y,
                const Regularizer& reg, Vec& losses, Matrix& grads, bool parallel) {
  if (rhs.rows != Y.rows) throw ValidationError("rhs/Y batch sizes differ");
  if (rhs.cols != proto.m() || Y.cols != proto.m())
    throw ValidationError("rhs/Y row length must equal the row count of A");
  const int batch = Y.rows;
  const int n = proto.n();
  const int m = proto.m();
  losses.assign(batch, 0.0);
  grads = Matrix(batch, m);
  const double ttol = 1e-12 * (1.0 + proto.c_inf_norm());
  const double ztol = 1e-14 * (1.0 + proto.c_inf_norm());
#pragma omp parallel if (parallel && batch > 1)
  {
    Vec z(n), zl(n), zu(n), x(n);
#pragma omp for schedule(static)
    for (int s = 0; s < batch; ++s) {
      reduced_costs(proto, Y.row(s), z.data());
      double xi = 0.0;
      if (reg.kind == RegKind::LogBarrier)
        complete_kernel_log(n, proto.l().data(), proto.u().data(), z.data(), reg.mu, ztol,
                            zl.data(), zu.data(), x.data(), &xi);
      else
        complete_kernel_unreg(n, proto.l().data(), proto.u().data(), z.data(), ttol, zl.data(),
                              zu.data(), x.data(), &xi);
      losses[s] = dot(rhs.row(s), Y.row(s), m) + xi;
      double* gs = grads.row(s);
      matvec_serial(proto.A(), x.data(), gs);
      const double* bs = rhs.row(s);
      for (int i = 0; i < m; ++i) gs[i] = bs[i] - gs[i];
    }
  }
}

}  // namespace

void batch_loss_grad(const ParametricLpInstance& proto, const Matrix& rhs, const Matrix& Y,
                     const Regularizer& reg, Vec& losses, Matrix& grads) {
  batch_impl(proto, rhs, Y, reg, losses, grads, true);
}

void batch_loss_grad_serial(const ParametricLpInstance& proto, const Matrix& rhs, const Matrix& Y,
                            const Regularizer& reg, Vec& losses, Matrix& grads) {
  batch_impl(proto, rhs, Y, reg, losses, grads, false);
}

}  // namespace dualprox
