#include "dualprox/completion.hpp"

#include <cmath>

namespace dualprox {

Regularizer Regularizer::log_barrier(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw ValidationError("log-barrier weight must be positive and finite");
  return {RegKind::LogBarrier, mu};
}

void complete_kernel_unreg(int n, const double* l, const double* u, const double* z,
                           double tie_tol, double* zl, double* zu, double* x, double* xi) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double zj = z[j];
    const double p = pos_part(zj);
    const double q = neg_part(zj);
    zl[j] = p;
    zu[j] = q;
    x[j] = std::abs(zj) <= tie_tol ? 0.5 * (l[j] + u[j]) : (zj > 0.0 ? l[j] : u[j]);
    acc += l[j] * p - u[j] * q;
  }
  *xi = acc;
}

void complete_kernel_log(int n, const double* l, const double* u, const double* z, double mu,
                         double z_tol, double* zl, double* zu, double* x, double* xi) {
  // zl = v + w + s and zu = v - w + s with v = mu/(u-l), w = z/2,
  // s = sqrt(v^2 + w^2). The smaller of the two roots is rewritten as
  // v + v^2/(s + |w|) to avoid cancellation when |w| >> v. Everything is a
  // select, so the loop vectorizes.
#pragma omp simd
  for (int j = 0; j < n; ++j) {
    const double v = mu / (u[j] - l[j]);
    const double w = 0.5 * z[j];
    const double aw = std::abs(w);
    const double s = std::sqrt(v * v + w * w);
    const double big = v + aw + s;
    const double small = v + v * v / (s + aw);
    zl[j] = w >= 0.0 ? big : small;
    zu[j] = w >= 0.0 ? small : big;

    // x = (u+l)/2 + mu/z - sign(z) sqrt((mu/z)^2 + r^2), r = (u-l)/2,
    // rewritten as mid - sign(z) r^2/(|mu/z| + sqrt(...)) which is exact for
    // both signs and stays finite as z -> 0 (the tie branch takes over).
    const double mid = 0.5 * (u[j] + l[j]);
    const double q = std::abs(mu / z[j]);
    const double r = 0.5 * (u[j] - l[j]);
    const double t = std::sqrt(q * q + r * r);
    const double shift = r * r / (q + t);
    const double away = z[j] > 0.0 ? mid - shift : mid + shift;
    x[j] = std::abs(z[j]) <= z_tol ? mid : away;
  }
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += l[j] * zl[j] - u[j] * zu[j];
  double logs = 0.0;
#pragma omp simd reduction(+ : logs)
  for (int j = 0; j < n; ++j) logs += std::log(zl[j]) + std::log(zu[j]);
  *xi = acc + mu * logs;
}

namespace {

double tie_tol(const ParametricLpInstance& inst) { return 1e-12 * (1.0 + inst.c_inf_norm()); }
double z_branch_tol(const ParametricLpInstance& inst) { return 1e-14 * (1.0 + inst.c_inf_norm()); }

}  // namespace

CompletionOutput complete_unregularized(const ParametricLpInstance& inst, const Vec& y) {
  const int n = inst.n();
  CompletionOutput out;
  out.zl.resize(n);
  out.zu.resize(n);
  out.x.resize(n);
  Vec z = reduced_costs(inst, y);
  complete_kernel_unreg(n, inst.l().data(), inst.u().data(), z.data(), tie_tol(inst),
                        out.zl.data(), out.zu.data(), out.x.data(), &out.xi);
  return out;
}

CompletionOutput complete_log_barrier(const ParametricLpInstance& inst, const Vec& y, double mu) {
  if (!(mu > 0.0)) throw ValidationError("log-barrier completion requires mu > 0");
  const int n = inst.n();
  CompletionOutput out;
  out.zl.resize(n);
  out.zu.resize(n);
  out.x.resize(n);
  Vec z = reduced_costs(inst, y);
  complete_kernel_log(n, inst.l().data(), inst.u().data(), z.data(), mu, z_branch_tol(inst),
                      out.zl.data(), out.zu.data(), out.x.data(), &out.xi);
  return out;
}

CompletionOutput complete(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg) {
  return reg.kind == RegKind::LogBarrier ? complete_log_barrier(inst, y, reg.mu)
                                         : complete_unregularized(inst, y);
}

double inner_value(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg) {
  return complete(inst, y, reg).xi;
}

namespace {

BatchCompletion batch_impl(const ParametricLpInstance& inst, const Matrix& Y,
                           const Regularizer& reg, bool parallel) {
  if (Y.cols != inst.m()) throw ValidationError("batch y rows have wrong length");
  const int batch = Y.rows;
  const int n = inst.n();
  BatchCompletion out;
  out.zl = Matrix(batch, n);
  out.zu = Matrix(batch, n);
  out.x = Matrix(batch, n);
  out.xi.resize(batch);
  const double ttol = tie_tol(inst);
  const double ztol = z_branch_tol(inst);
#pragma omp parallel if (parallel && batch > 1)
  {
    Vec z(n);
#pragma omp for schedule(static)
    for (int s = 0; s < batch; ++s) {
      reduced_costs(inst, Y.row(s), z.data());
      if (reg.kind == RegKind::LogBarrier)
        complete_kernel_log(n, inst.l().data(), inst.u().data(), z.data(), reg.mu, ztol,
                            out.zl.row(s), out.zu.row(s), out.x.row(s), &out.xi[s]);
      else
        complete_kernel_unreg(n, inst.l().data(), inst.u().data(), z.data(), ttol, out.zl.row(s),
                              out.zu.row(s), out.x.row(s), &out.xi[s]);
    }
  }
  return out;
}

}  // namespace

BatchCompletion complete_batch(const ParametricLpInstance& inst, const Matrix& Y,
                               const Regularizer& reg) {
  return batch_impl(inst, Y, reg, true);
}

BatchCompletion complete_batch_serial(const ParametricLpInstance& inst, const Matrix& Y,
                                      const Regularizer& reg) {
  return batch_impl(inst, Y, reg, false);
}

LimitReport limit_consistency_check(const ParametricLpInstance& inst, const Vec& y,
                                    const std::vector<double>& mu_sequence) {
  if (mu_sequence.empty()) throw ValidationError("mu sequence must be nonempty");
  for (size_t k = 0; k + 1 < mu_sequence.size(); ++k)
    if (!(mu_sequence[k + 1] < mu_sequence[k]))
      throw ValidationError("mu sequence must be strictly decreasing");

  const CompletionOutput ref = complete_unregularized(inst, y);
  const int n = inst.n();

  LimitReport rep;
  rep.mu = mu_sequence;
  rep.deviation.reserve(mu_sequence.size());
  for (double mu : mu_sequence) {
    const CompletionOutput c = complete_log_barrier(inst, y, mu);
    double dev = 0.0;
    for (int j = 0; j < n; ++j) {
      dev = std::max(dev, std::abs(c.zl[j] - ref.zl[j]));
      dev = std::max(dev, std::abs(c.zu[j] - ref.zu[j]));
    }
    // de-regularized inner value: xi minus the mu*Phi part
    double xi_lin = 0.0;
    for (int j = 0; j < n; ++j) xi_lin += inst.l()[j] * c.zl[j] - inst.u()[j] * c.zu[j];
    dev = std::max(dev, std::abs(xi_lin - ref.xi));
    rep.deviation.push_back(dev);
  }
  rep.monotone = true;
  for (size_t k = 0; k + 1 < rep.deviation.size(); ++k)
    if (rep.deviation[k + 1] > 1.10 * rep.deviation[k] + 1e-300) rep.monotone = false;
  rep.final_deviation = rep.deviation.back();
  return rep;
}

}  // namespace dualprox
