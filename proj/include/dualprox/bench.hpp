#pragma once

#include "dualprox/io.hpp"

namespace dualprox {

struct BenchReport {
  int batch = 0;
  int n = 0, m = 0;
  // full pipeline, milliseconds per batch
  double inference_ms = 0.0;  // model forward + unregularized completion
  double solver_ms = 0.0;     // interior-point solves
  double solve_speedup = 0.0;
  // completion mechanism only (shared reduced costs excluded on both sides),
  // milliseconds per batch
  double completion_ms = 0.0;
  double inner_oracle_ms = 0.0;
  double completion_speedup = 0.0;
};

// Medians over `runs` timed repetitions after one warm-up pass.
BenchReport run_bench(const MlpModel& model, const ParametricLpInstance& proto,
                      const std::vector<EvalSample>& samples, int batch, int runs, double mu);

std::string format_bench_report(const BenchReport& r);

// Serial vs OpenMP kernel comparison (completion, loss/gradient, matrix
// products). Returns a printable table; used by the standalone benchmark.
std::string bench_kernels(int batch, int n, int m, int runs);

}  // namespace dualprox
