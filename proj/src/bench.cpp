#include "dualprox/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace dualprox {

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
  const auto t0 = Clock::now();
  fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

double median_ms(const std::function<void()>& fn, int runs) {
  fn();  // warm-up
  std::vector<double> t;
  t.reserve(runs);
  for (int r = 0; r < runs; ++r) t.push_back(time_ms(fn));
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

}  // namespace

BenchReport run_bench(const MlpModel& model, const ParametricLpInstance& proto,
                      const std::vector<EvalSample>& samples, int batch, int runs, double mu) {
  if (samples.empty()) throw ValidationError("bench needs at least one sample");
  if (batch < 1 || runs < 1) throw ValidationError("bad bench parameters");

  BenchReport rep;
  rep.batch = batch;
  rep.n = proto.n();
  rep.m = proto.m();

  // replicate samples up to the requested batch size
  Matrix features(batch, static_cast<int>(samples[0].beta.size()));
  std::vector<Vec> rhs(batch);
  for (int s = 0; s < batch; ++s) {
    const EvalSample& e = samples[s % samples.size()];
    std::copy(e.beta.begin(), e.beta.end(), features.row(s));
    rhs[s] = e.rhs;
  }

  // (a) proxy inference: forward pass + completion from the predicted y
  volatile double sink = 0.0;
  rep.inference_ms = median_ms(
      [&] {
        const Matrix out = mlp_forward(model, features, nullptr);
        Matrix Y(batch, proto.m());
        for (int s = 0; s < batch; ++s) std::copy_n(out.row(s), proto.m(), Y.row(s));
        const BatchCompletion comp = complete_batch(proto, Y, Regularizer::none());
        sink = comp.xi[0];
      },
      runs);

  // (b) full solves on the same batch
  rep.solver_ms = median_ms(
      [&] {
        double acc = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(+ : acc)
        for (int s = 0; s < batch; ++s) {
          const SolveResult res = solve_lp(proto.with_rhs(rhs[s]));
          acc += res.primal_obj;
        }
        sink = acc;
      },
      runs);
  rep.solve_speedup = rep.solver_ms / rep.inference_ms;

  // (c) completion mechanism in isolation: both sides start from the same
  // precomputed reduced costs
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> zs(batch, Vec(proto.n()));
  {
    Vec y(proto.m());
    for (int s = 0; s < batch; ++s) {
      for (double& v : y) v = gauss(rng);
      reduced_costs(proto, y.data(), zs[s].data());
    }
  }
  const double ztol = 1e-14 * (1.0 + proto.c_inf_norm());
  const Regularizer reg = Regularizer::log_barrier(mu);

  rep.completion_ms = median_ms(
      [&] {
        double acc = 0.0;
        Vec zl(proto.n()), zu(proto.n()), x(proto.n());
        for (int s = 0; s < batch; ++s) {
          double xi;
          complete_kernel_log(proto.n(), proto.l().data(), proto.u().data(), zs[s].data(), mu,
                              ztol, zl.data(), zu.data(), x.data(), &xi);
          acc += xi;
        }
        sink = acc;
      },
      runs);

  rep.inner_oracle_ms = median_ms(
      [&] {
        double acc = 0.0;
        for (int s = 0; s < batch; ++s) {
          const InnerSolution sol = solve_inner_from_z(proto.l(), proto.u(), zs[s], reg);
          acc += sol.xi;
        }
        sink = acc;
      },
      runs);
  rep.completion_speedup = rep.inner_oracle_ms / rep.completion_ms;
  (void)sink;
  return rep;
}

std::string format_bench_report(const BenchReport& r) {
  std::ostringstream ss;
  ss << "batch " << r.batch << ", n = " << r.n << ", m = " << r.m << "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "  proxy inference + completion : %10.3f ms\n", r.inference_ms);
  ss << buf;
  std::snprintf(buf, sizeof buf, "  interior-point solves        : %10.3f ms\n", r.solver_ms);
  ss << buf;
  std::snprintf(buf, sizeof buf, "  speedup (solves / inference) : %10.1fx\n", r.solve_speedup);
  ss << buf;
  std::snprintf(buf, sizeof buf, "  closed-form completion       : %10.3f ms\n", r.completion_ms);
  ss << buf;
  std::snprintf(buf, sizeof buf, "  per-coordinate inner oracle  : %10.3f ms\n",
                r.inner_oracle_ms);
  ss << buf;
  std::snprintf(buf, sizeof buf, "  speedup (oracle / closed)    : %10.1fx\n",
                r.completion_speedup);
  ss << buf;
  return ss.str();
}

std::string bench_kernels(int batch, int n, int m, int runs) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix A(m, n);
  for (double& v : A.data) v = gauss(rng);
  Vec b(m, 0.0), c(n), l(n), u(n);
  for (int j = 0; j < n; ++j) {
    c[j] = gauss(rng);
    l[j] = -1.0 - std::abs(gauss(rng));
    u[j] = 1.0 + std::abs(gauss(rng));
  }
  const ParametricLpInstance inst(std::move(A), b, c, l, u);

  Matrix Y(batch, m), rhs(batch, m);
  for (double& v : Y.data) v = gauss(rng);
  for (double& v : rhs.data) v = gauss(rng);

  const Regularizer reg = Regularizer::log_barrier(0.1);
  std::ostringstream ss;
  char buf[200];

  const double comp_serial =
      median_ms([&] { complete_batch_serial(inst, Y, reg); }, runs);
  const double comp_par = median_ms([&] { complete_batch(inst, Y, reg); }, runs);
  std::snprintf(buf, sizeof buf, "%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n",
                "batch completion", comp_serial, comp_par, comp_serial / comp_par);
  ss << buf;

  Vec losses;
  Matrix grads;
  const double loss_serial =
      median_ms([&] { batch_loss_grad_serial(inst, rhs, Y, reg, losses, grads); }, runs);
  const double loss_par =
      median_ms([&] { batch_loss_grad(inst, rhs, Y, reg, losses, grads); }, runs);
  std::snprintf(buf, sizeof buf, "%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n",
                "batch loss + gradient", loss_serial, loss_par, loss_serial / loss_par);
  ss << buf;

  Matrix X(batch, n), W(m, n), C(batch, m);
  for (double& v : X.data) v = gauss(rng);
  for (double& v : W.data) v = gauss(rng);
  const double gemm_serial = median_ms([&] { gemm_nt_serial(X, W, C); }, runs);
  const double gemm_par = median_ms([&] { gemm_nt(X, W, C); }, runs);
  std::snprintf(buf, sizeof buf, "%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n",
                "dense product (NT)", gemm_serial, gemm_par, gemm_serial / gemm_par);
  ss << buf;

  // the parallel paths must be bitwise identical to the serial ones
  const BatchCompletion a = complete_batch_serial(inst, Y, reg);
  const BatchCompletion p = complete_batch(inst, Y, reg);
  bool identical = a.zl.data == p.zl.data && a.zu.data == p.zu.data && a.x.data == p.x.data &&
                   a.xi == p.xi;
  ss << (identical ? "parallel results match serial bitwise\n"
                   : "WARNING: parallel results differ from serial\n");
  return ss.str();
}

}  // namespace dualprox
