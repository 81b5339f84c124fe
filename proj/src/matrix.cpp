#include "dualprox/matrix.hpp"

#include <cmath>

namespace dualprox {

void matvec_serial(const Matrix& A, const double* x, double* y) {
  for (int i = 0; i < A.rows; ++i) y[i] = dot(A.row(i), x, A.cols);
}

void matvec(const Matrix& A, const double* x, double* y) {
#pragma omp parallel for schedule(static) if (A.rows > 63)
  for (int i = 0; i < A.rows; ++i) y[i] = dot(A.row(i), x, A.cols);
}

void mat_t_vec(const Matrix& A, const double* y, double* z) {
  for (int j = 0; j < A.cols; ++j) z[j] = 0.0;
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    const double yi = y[i];
    for (int j = 0; j < A.cols; ++j) z[j] += yi * ai[j];
  }
}

void gemm_nt_serial(const Matrix& X, const Matrix& W, Matrix& C) {
  assert(X.cols == W.cols && C.rows == X.rows && C.cols == W.rows);
  for (int s = 0; s < X.rows; ++s) {
    const double* xs = X.row(s);
    double* cs = C.row(s);
    for (int o = 0; o < W.rows; ++o) cs[o] = dot(xs, W.row(o), X.cols);
  }
}

void gemm_nt(const Matrix& X, const Matrix& W, Matrix& C) {
  assert(X.cols == W.cols && C.rows == X.rows && C.cols == W.rows);
#pragma omp parallel for schedule(static) if (X.rows > 1)
  for (int s = 0; s < X.rows; ++s) {
    const double* xs = X.row(s);
    double* cs = C.row(s);
    for (int o = 0; o < W.rows; ++o) cs[o] = dot(xs, W.row(o), X.cols);
  }
}

void gemm_nn_serial(const Matrix& D, const Matrix& W, Matrix& C) {
  assert(D.cols == W.rows && C.rows == D.rows && C.cols == W.cols);
  for (int s = 0; s < D.rows; ++s) {
    const double* ds = D.row(s);
    double* cs = C.row(s);
    for (int j = 0; j < C.cols; ++j) cs[j] = 0.0;
    for (int k = 0; k < D.cols; ++k) {
      const double d = ds[k];
      const double* wk = W.row(k);
      for (int j = 0; j < C.cols; ++j) cs[j] += d * wk[j];
    }
  }
}

void gemm_nn(const Matrix& D, const Matrix& W, Matrix& C) {
  assert(D.cols == W.rows && C.rows == D.rows && C.cols == W.cols);
#pragma omp parallel for schedule(static) if (D.rows > 1)
  for (int s = 0; s < D.rows; ++s) {
    const double* ds = D.row(s);
    double* cs = C.row(s);
    for (int j = 0; j < C.cols; ++j) cs[j] = 0.0;
    for (int k = 0; k < D.cols; ++k) {
      const double d = ds[k];
      const double* wk = W.row(k);
      for (int j = 0; j < C.cols; ++j) cs[j] += d * wk[j];
    }
  }
}

void gemm_tn_serial(const Matrix& D, const Matrix& H, Matrix& C) {
  assert(D.rows == H.rows && C.rows == D.cols && C.cols == H.cols);
  for (int o = 0; o < D.cols; ++o) {
    double* co = C.row(o);
    for (int j = 0; j < C.cols; ++j) co[j] = 0.0;
    for (int s = 0; s < D.rows; ++s) {
      const double d = D(s, o);
      const double* hs = H.row(s);
      for (int j = 0; j < C.cols; ++j) co[j] += d * hs[j];
    }
  }
}

void gemm_tn(const Matrix& D, const Matrix& H, Matrix& C) {
  assert(D.rows == H.rows && C.rows == D.cols && C.cols == H.cols);
#pragma omp parallel for schedule(static) if (D.cols > 1)
  for (int o = 0; o < D.cols; ++o) {
    double* co = C.row(o);
    for (int j = 0; j < C.cols; ++j) co[j] = 0.0;
    for (int s = 0; s < D.rows; ++s) {
      const double d = D(s, o);
      const double* hs = H.row(s);
      for (int j = 0; j < C.cols; ++j) co[j] += d * hs[j];
    }
  }
}

bool cholesky(Matrix& A) {
  assert(A.rows == A.cols);
  const int n = A.rows;
  for (int k = 0; k < n; ++k) {
    double d = A(k, k) - dot(A.row(k), A.row(k), k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    A(k, k) = d;
#pragma omp parallel for schedule(static) if (n - k > 127)
    for (int i = k + 1; i < n; ++i) {
      A(i, k) = (A(i, k) - dot(A.row(i), A.row(k), k)) / d;
    }
  }
  return true;
}

void cholesky_solve(const Matrix& L, const double* rhs, double* sol) {
  const int n = L.rows;
  // forward: L w = rhs
  for (int i = 0; i < n; ++i) {
    sol[i] = (rhs[i] - dot(L.row(i), sol, i)) / L(i, i);
  }
  // backward: L^T x = w
  for (int i = n - 1; i >= 0; --i) {
    double s = sol[i];
    for (int k = i + 1; k < n; ++k) s -= L(k, i) * sol[k];
    sol[i] = s / L(i, i);
  }
}

}  // namespace dualprox
