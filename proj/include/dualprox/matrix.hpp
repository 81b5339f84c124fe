#pragma once

#include <cassert>
#include <vector>

#include "dualprox/common.hpp"

namespace dualprox {

// Dense row-major matrix. The canonical storage for everything in this
// project; desk-scale problems never need sparsity.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

  double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  Matrix transposed() const {
    Matrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
};

// y = A x. Parallel version assigns whole rows to threads, so the result is
// bitwise identical to the serial one for any thread count.
void matvec(const Matrix& A, const double* x, double* y);
void matvec_serial(const Matrix& A, const double* x, double* y);

// z = A^T y (column-strided reads; prefer a cached transpose on hot paths).
void mat_t_vec(const Matrix& A, const double* y, double* z);

// C = X * W^T. X is MxK, W is NxK, C is MxN. Rows of C are independent.
void gemm_nt(const Matrix& X, const Matrix& W, Matrix& C);
void gemm_nt_serial(const Matrix& X, const Matrix& W, Matrix& C);

// C = D * W. D is MxK, W is KxN, C is MxN.
void gemm_nn(const Matrix& D, const Matrix& W, Matrix& C);
void gemm_nn_serial(const Matrix& D, const Matrix& W, Matrix& C);

// C = D^T * H. D is MxK, H is MxN, C is KxN.
void gemm_tn(const Matrix& D, const Matrix& H, Matrix& C);
void gemm_tn_serial(const Matrix& D, const Matrix& H, Matrix& C);

// In-place Cholesky of a symmetric positive definite matrix (lower triangle).
// Returns false if a non-positive pivot is hit.
bool cholesky(Matrix& A);
void cholesky_solve(const Matrix& L, const double* rhs, double* sol);

}  // namespace dualprox
