// Compares the OpenMP kernels against their serial reference implementations
// and checks that both produce bitwise-identical results.

#include <cstdio>
#include <cstdlib>

#include "dualprox/bench.hpp"

int main(int argc, char** argv) {
  int batch = 1024, n = 500, m = 250, runs = 5;
  if (argc > 1) batch = std::atoi(argv[1]);
  if (argc > 2) n = std::atoi(argv[2]);
  if (argc > 3) m = std::atoi(argv[3]);
  if (argc > 4) runs = std::atoi(argv[4]);
  std::printf("kernel benchmark: batch=%d n=%d m=%d (median of %d runs)\n", batch, n, m, runs);
  std::fputs(dualprox::bench_kernels(batch, n, m, runs).c_str(), stdout);
  return 0;
}
