#include "dualprox/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dualprox {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kTol = 1e-9;
constexpr double kStepDamp = 0.9995;

// M = A diag(d) A', lower triangle filled.
void scaled_normal_matrix(const Matrix& A, const Vec& d, Matrix& M) {
  const int m = A.rows, n = A.cols;
  Matrix As(m, n);  // A scaled by sqrt(d) row-wise products come out right
#pragma omp parallel for schedule(static) if (m > 1)
  for (int i = 0; i < m; ++i) {
    const double* ai = A.row(i);
    double* si = As.row(i);
    for (int j = 0; j < n; ++j) si[j] = ai[j] * d[j];
  }
#pragma omp parallel for schedule(static) if (m > 1)
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k <= i; ++k) M(i, k) = dot(As.row(i), A.row(k), n);
  }
}

bool factor_normal(const Matrix& A, const Vec& d, Matrix& L) {
  scaled_normal_matrix(A, d, L);
  double max_diag = 0.0;
  for (int i = 0; i < A.rows; ++i) max_diag = std::max(max_diag, L(i, i));
  Matrix backup = L;
  if (cholesky(L)) return true;
  // retry with a small static shift before giving up
  L = backup;
  for (int i = 0; i < A.rows; ++i) L(i, i) += 1e-12 * (1.0 + max_diag);
  return cholesky(L);
}

double step_to_boundary(const Vec& v, const Vec& dv) {
  double alpha = 1.0;
  for (size_t j = 0; j < v.size(); ++j)
    if (dv[j] < 0.0) alpha = std::min(alpha, -v[j] / dv[j]);
  return alpha;
}

}  // namespace

SolveResult solve_lp(const ParametricLpInstance& inst) {
  const int m = inst.m(), n = inst.n();
  const Matrix& A = inst.A();
  const Vec &b = inst.b(), &c = inst.c(), &l = inst.l(), &u = inst.u();

  SolveResult res;
  res.x.assign(n, 0.0);
  res.y.assign(m, 0.0);
  res.zl.assign(n, 0.0);
  res.zu.assign(n, 0.0);

  const double b_scale = 1.0 + inf_norm(b);
  const double c_scale = 1.0 + inf_norm(c);

  // --- starting point ---------------------------------------------------
  Vec& x = res.x;
  Vec& y = res.y;
  Vec& zl = res.zl;
  Vec& zu = res.zu;

  {
    Matrix L(m, m);
    Vec ones(n, 1.0);
    if (!factor_normal(A, ones, L)) {
      res.status = SolveStatus::NumericalFailure;
      return res;
    }
    // x: least-squares correction of the midpoint onto Ax=b, pulled interior
    Vec mid(n), r(m), w(m);
    for (int j = 0; j < n; ++j) mid[j] = 0.5 * (l[j] + u[j]);
    matvec(A, mid.data(), r.data());
    for (int i = 0; i < m; ++i) r[i] = b[i] - r[i];
    cholesky_solve(L, r.data(), w.data());
    mat_t_vec(A, w.data(), x.data());
    for (int j = 0; j < n; ++j) {
      const double margin = 0.01 * (u[j] - l[j]);
      x[j] = std::clamp(mid[j] + x[j], l[j] + margin, u[j] - margin);
    }
    // y: least-squares dual of the unscaled problem
    matvec(A, c.data(), r.data());
    cholesky_solve(L, r.data(), y.data());
    Vec z(n);
    reduced_costs(inst, y.data(), z.data());
    double xsum = 1.0, zsum = 1.0, mu0 = 1.0;
    for (int j = 0; j < n; ++j) {
      zl[j] = pos_part(z[j]) + 1.0;
      zu[j] = neg_part(z[j]) + 1.0;
      xsum += (x[j] - l[j]) + (u[j] - x[j]);
      zsum += zl[j] + zu[j];
      mu0 += (x[j] - l[j]) * zl[j] + (u[j] - x[j]) * zu[j];
    }
    const double dz = 0.5 * mu0 / xsum;
    for (int j = 0; j < n; ++j) {
      zl[j] += dz;
      zu[j] += dz;
    }
    (void)zsum;
  }

  Vec sl(n), su(n), rp(m), rd(n), dvec(n), rtil(n), rhs(m);
  Vec dx(n), dy(m), dzl(n), dzu(n);
  Vec dx_aff(n), dzl_aff(n), dzu_aff(n);
  Vec rcl(n), rcu(n), tmp_n(n);
  Matrix L(m, m);

  int bad_steps = 0;
  for (int iter = 0; iter <= kMaxIterations; ++iter) {
    res.iterations = iter;
    for (int j = 0; j < n; ++j) {
      sl[j] = x[j] - l[j];
      su[j] = u[j] - x[j];
    }
    matvec(A, x.data(), rp.data());
    for (int i = 0; i < m; ++i) rp[i] = b[i] - rp[i];
    reduced_costs(inst, y.data(), rd.data());
    for (int j = 0; j < n; ++j) rd[j] -= zl[j] - zu[j];

    const double pobj = dot(c, x);
    const double dobj = dot(b, y) + dot(l, zl) - dot(u, zu);
    const double rel_p = inf_norm(rp) / b_scale;
    const double rel_d = inf_norm(rd) / c_scale;
    const double rel_g = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    res.primal_obj = pobj;
    res.dual_obj = dobj;
    res.kkt_residual = std::max({rel_p, rel_d, rel_g});

    if (res.kkt_residual <= kTol) {
      res.status = SolveStatus::Optimal;
      return res;
    }
    if (iter == kMaxIterations) {
      res.status = res.kkt_residual <= 1e-8 ? SolveStatus::Optimal : SolveStatus::MaxIter;
      return res;
    }

    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += sl[j] * zl[j] + su[j] * zu[j];
    mu /= 2.0 * n;

    for (int j = 0; j < n; ++j) dvec[j] = 1.0 / (zl[j] / sl[j] + zu[j] / su[j]);
    if (!factor_normal(A, dvec, L)) {
      res.status = SolveStatus::NumericalFailure;
      return res;
    }

    // predictor (affine scaling)
    for (int j = 0; j < n; ++j) {
      rcl[j] = -sl[j] * zl[j];
      rcu[j] = -su[j] * zu[j];
      rtil[j] = rd[j] - rcl[j] / sl[j] + rcu[j] / su[j];
    }
    for (int j = 0; j < n; ++j) tmp_n[j] = dvec[j] * rtil[j];
    matvec(A, tmp_n.data(), rhs.data());
    for (int i = 0; i < m; ++i) rhs[i] += rp[i];
    cholesky_solve(L, rhs.data(), dy.data());
    mat_t_vec(A, dy.data(), dx.data());
    for (int j = 0; j < n; ++j) dx[j] = dvec[j] * (dx[j] - rtil[j]);
    for (int j = 0; j < n; ++j) {
      dzl[j] = (rcl[j] - zl[j] * dx[j]) / sl[j];
      dzu[j] = (rcu[j] + zu[j] * dx[j]) / su[j];
    }

    dx_aff = dx;
    dzl_aff = dzl;
    dzu_aff = dzu;
    double ap = 1.0, ad = 1.0;
    for (int j = 0; j < n; ++j) {
      if (dx[j] < 0.0) ap = std::min(ap, -sl[j] / dx[j]);
      if (dx[j] > 0.0) ap = std::min(ap, su[j] / dx[j]);
    }
    ad = std::min(step_to_boundary(zl, dzl), step_to_boundary(zu, dzu));

    double mu_aff = 0.0;
    for (int j = 0; j < n; ++j)
      mu_aff += (sl[j] + ap * dx[j]) * (zl[j] + ad * dzl[j]) +
                (su[j] - ap * dx[j]) * (zu[j] + ad * dzu[j]);
    mu_aff /= 2.0 * n;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // corrector
    for (int j = 0; j < n; ++j) {
      rcl[j] = sigma * mu - sl[j] * zl[j] - dx_aff[j] * dzl_aff[j];
      rcu[j] = sigma * mu - su[j] * zu[j] + dx_aff[j] * dzu_aff[j];
      rtil[j] = rd[j] - rcl[j] / sl[j] + rcu[j] / su[j];
    }
    for (int j = 0; j < n; ++j) tmp_n[j] = dvec[j] * rtil[j];
    matvec(A, tmp_n.data(), rhs.data());
    for (int i = 0; i < m; ++i) rhs[i] += rp[i];
    cholesky_solve(L, rhs.data(), dy.data());
    mat_t_vec(A, dy.data(), dx.data());
    for (int j = 0; j < n; ++j) dx[j] = dvec[j] * (dx[j] - rtil[j]);
    for (int j = 0; j < n; ++j) {
      dzl[j] = (rcl[j] - zl[j] * dx[j]) / sl[j];
      dzu[j] = (rcu[j] + zu[j] * dx[j]) / su[j];
    }

    ap = 1.0;
    for (int j = 0; j < n; ++j) {
      if (dx[j] < 0.0) ap = std::min(ap, -sl[j] / dx[j]);
      if (dx[j] > 0.0) ap = std::min(ap, su[j] / dx[j]);
    }
    ad = std::min(step_to_boundary(zl, dzl), step_to_boundary(zu, dzu));
    ap = std::min(1.0, kStepDamp * ap);
    ad = std::min(1.0, kStepDamp * ad);

    if (std::min(ap, ad) < 1e-8) {
      if (++bad_steps >= 5) {
        res.status = res.kkt_residual <= 1e-8 ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
        return res;
      }
    } else {
      bad_steps = 0;
    }

    for (int j = 0; j < n; ++j) x[j] += ap * dx[j];
    for (int i = 0; i < m; ++i) y[i] += ad * dy[i];
    for (int j = 0; j < n; ++j) {
      zl[j] += ad * dzl[j];
      zu[j] += ad * dzu[j];
    }
  }

  res.status = SolveStatus::MaxIter;
  return res;
}

std::pair<double, double> solve_inner_1d(double l, double u, double mu, double z) {
  if (!(l < u)) throw ValidationError("solve_inner_1d requires l < u");
  if (!(mu > 0.0)) throw ValidationError("solve_inner_1d requires mu > 0");
  // Solve in terms of the offset d from the lower limit max(0, z): with
  // a = max(z, 0) and b = max(-z, 0), the maximizer is (zl, zu) = (a+d, b+d).
  // Working in d keeps full relative precision when one multiplier is tiny
  // next to |z|.
  const double a = pos_part(z);
  const double b = neg_part(z);
  const auto F = [&](double d) { return (l - u) + mu / (a + d) + mu / (b + d); };

  // bracket: F decreases from +inf at d -> 0 to l-u < 0
  double hi = mu / (u - l);
  if (!(hi > 0.0)) hi = 1e-300;
  while (F(hi) >= 0.0) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // bracket collapsed to adjacent doubles
    if (F(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double d = hi;

  // Newton polish, safeguarded to stay positive
  const double f_scale = 1.0 + std::abs(l) + std::abs(u);
  for (int it = 0; it < 50; ++it) {
    const double f = F(d);
    if (std::abs(f) <= 1e-12 * f_scale) break;
    const double fp = -mu / ((a + d) * (a + d)) - mu / ((b + d) * (b + d));
    const double dn = d - f / fp;
    if (!(dn > 0.0) || !std::isfinite(dn)) break;
    d = dn;
  }
  return {a + d, b + d};
}

InnerSolution solve_inner_from_z(const Vec& l, const Vec& u, const Vec& z,
                                 const Regularizer& reg) {
  const int n = static_cast<int>(z.size());
  InnerSolution s;
  s.zl.resize(n);
  s.zu.resize(n);

  if (reg.kind == RegKind::None) {
    // separable LP: value l*t - u*(t-z) decreases along the feasible ray, so
    // the optimum sits at the endpoint t = max(z, 0)
    for (int j = 0; j < n; ++j) {
      s.zl[j] = pos_part(z[j]);
      s.zu[j] = neg_part(z[j]);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const auto [t, tz] = solve_inner_1d(l[j], u[j], reg.mu, z[j]);
      s.zl[j] = t;
      s.zu[j] = tz;
    }
  }

  // oracle-grade summation: sorted magnitudes, extended precision
  std::vector<long double> terms;
  terms.reserve(reg.kind == RegKind::LogBarrier ? 4 * n : 2 * n);
  for (int j = 0; j < n; ++j) {
    terms.push_back(static_cast<long double>(l[j]) * s.zl[j]);
    terms.push_back(-static_cast<long double>(u[j]) * s.zu[j]);
  }
  if (reg.kind == RegKind::LogBarrier) {
    for (int j = 0; j < n; ++j) {
      terms.push_back(static_cast<long double>(reg.mu) *
                      std::log(static_cast<long double>(s.zl[j])));
      terms.push_back(static_cast<long double>(reg.mu) *
                      std::log(static_cast<long double>(s.zu[j])));
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](long double a, long double b) { return std::abs(a) < std::abs(b); });
  long double acc = 0.0L;
  for (long double t : terms) acc += t;
  s.xi = static_cast<double>(acc);
  return s;
}

InnerSolution solve_inner(const ParametricLpInstance& inst, const Vec& y, const Regularizer& reg) {
  return solve_inner_from_z(inst.l(), inst.u(), reduced_costs(inst, y), reg);
}

SmoothedDualResult solve_smoothed_dual(const ParametricLpInstance& inst, double mu) {
  if (!(mu > 0.0)) throw ValidationError("solve_smoothed_dual requires mu > 0");
  const int m = inst.m(), n = inst.n();
  const Regularizer reg = Regularizer::log_barrier(mu);

  SmoothedDualResult out;
  out.y.assign(m, 0.0);
  Vec& y = out.y;

  const double g_tol = 1e-8 * (1.0 + inf_norm(inst.b()));
  Vec z(n), zl(n), zu(n), x(n), g(m), d(m), curv(n), yt(m);
  Matrix L(m, m);

  const auto eval = [&](const Vec& yy) {
    Vec zz = reduced_costs(inst, yy);
    double xi;
    Vec tl(n), tu(n), tx(n);
    complete_kernel_log(n, inst.l().data(), inst.u().data(), zz.data(), mu,
                        1e-14 * (1.0 + inst.c_inf_norm()), tl.data(), tu.data(), tx.data(), &xi);
    return dot(inst.b(), yy) + xi;
  };

  double fval = eval(y);
  for (int iter = 0; iter < 100; ++iter) {
    out.iterations = iter;
    reduced_costs(inst, y.data(), z.data());
    double xi;
    complete_kernel_log(n, inst.l().data(), inst.u().data(), z.data(), mu,
                        1e-14 * (1.0 + inst.c_inf_norm()), zl.data(), zu.data(), x.data(), &xi);
    matvec(inst.A(), x.data(), g.data());
    for (int i = 0; i < m; ++i) g[i] = inst.b()[i] - g[i];
    out.grad_inf = inf_norm(g);
    out.value = dot(inst.b(), y) + xi;
    if (out.grad_inf <= g_tol) {
      out.status = SolveStatus::Optimal;
      return out;
    }

    // curvature of the inner value: x'(z) = -mu * zl'(z) / zl^2 with
    // zl'(z) = (1 + w/s)/2; Newton system uses -x' > 0 as the scaling
    for (int j = 0; j < n; ++j) {
      const double v = mu / (inst.u()[j] - inst.l()[j]);
      const double w = 0.5 * z[j];
      const double s = std::sqrt(v * v + w * w);
      curv[j] = mu * 0.5 * (1.0 + w / s) / (zl[j] * zl[j]);
    }
    if (!factor_normal(inst.A(), curv, L)) {
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    cholesky_solve(L, g.data(), d.data());

    const double slope = dot(g, d);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < m; ++i) yt[i] = y[i] + t * d[i];
      const double ft = eval(yt);
      if (ft >= fval + 0.25 * t * slope) {
        y = yt;
        fval = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.status = SolveStatus::MaxIter;
      return out;
    }
  }
  out.status = SolveStatus::MaxIter;
  return out;
}

}  // namespace dualprox
