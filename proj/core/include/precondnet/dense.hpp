#ifndef PRECONDNET_DENSE_HPP
#define PRECONDNET_DENSE_HPP

#include <vector>

#include "precondnet/csr.hpp"

namespace precondnet {

/// Row-major dense matrix for desk-scale spectral computations and oracles.
struct DenseMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> values; // row-major, n_rows * n_cols

    DenseMatrix() = default;
    DenseMatrix(int rows, int cols)
        : n_rows(rows), n_cols(cols),
          values(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n_cols + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_cols + j]; }

    static DenseMatrix identity(int n);
};

DenseMatrix to_dense(const CsrMatrix& A);

/// C = A * B.
DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B);

/// Dense rows of A (sparse) times B: C = A * B without densifying A.
DenseMatrix spmm(const CsrMatrix& A, const DenseMatrix& B);

DenseMatrix dense_transpose(const DenseMatrix& A);

/// Cholesky factorization A = Tc * Tc^T for symmetric positive definite A;
/// returns the lower factor with strictly positive diagonal. Serves as the
/// SPD certificate and as the direct-solve oracle in tests. Throws "not
/// positive definite" on a non-positive pivot and rejects matrices above the
/// dense workspace cap.
DenseMatrix dense_cholesky(const DenseMatrix& A);

/// Solve A x = b given the lower Cholesky factor of A.
std::vector<double> cholesky_solve(const DenseMatrix& lower, std::span<const double> b);

} // namespace precondnet

#endif
