#include "precondnet/dense.hpp"

#include <cmath>
#include <string>

#include "precondnet/config.hpp"
#include "precondnet/error.hpp"

namespace precondnet {

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix I(n, n);
    for (int i = 0; i < n; ++i) I.at(i, i) = 1.0;
    return I;
}

DenseMatrix to_dense(const CsrMatrix& A) {
    DenseMatrix D(A.n_rows, A.n_cols);
    for (int i = 0; i < A.n_rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            D.at(i, A.col_idx[k]) = A.values[k];
    return D;
}

DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.n_cols != B.n_rows) throw Error("matmul: inner dimensions disagree");
    DenseMatrix C(A.n_rows, B.n_cols);
    for (int i = 0; i < A.n_rows; ++i) {
        for (int k = 0; k < A.n_cols; ++k) {
            const double a = A.at(i, k);
            if (a == 0.0) continue;
            const double* brow = &B.values[static_cast<std::size_t>(k) * B.n_cols];
            double* crow = &C.values[static_cast<std::size_t>(i) * C.n_cols];
            for (int j = 0; j < B.n_cols; ++j) crow[j] += a * brow[j];
        }
    }
    return C;
}

DenseMatrix spmm(const CsrMatrix& A, const DenseMatrix& B) {
    if (A.n_cols != B.n_rows) throw Error("spmm: inner dimensions disagree");
    DenseMatrix C(A.n_rows, B.n_cols);
    for (int i = 0; i < A.n_rows; ++i) {
        double* crow = &C.values[static_cast<std::size_t>(i) * C.n_cols];
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const double a = A.values[k];
            const double* brow = &B.values[static_cast<std::size_t>(A.col_idx[k]) * B.n_cols];
            for (int j = 0; j < B.n_cols; ++j) crow[j] += a * brow[j];
        }
    }
    return C;
}

DenseMatrix dense_transpose(const DenseMatrix& A) {
    DenseMatrix T(A.n_cols, A.n_rows);
    for (int i = 0; i < A.n_rows; ++i)
        for (int j = 0; j < A.n_cols; ++j) T.at(j, i) = A.at(i, j);
    return T;
}

DenseMatrix dense_cholesky(const DenseMatrix& A) {
    const int n = A.n_rows;
    if (A.n_cols != n) throw Error("dense_cholesky: matrix must be square");
    if (n > dense_cap())
        throw Error("dense_cholesky: size " + std::to_string(n) +
                    " exceeds dense workspace cap " + std::to_string(dense_cap()));

    DenseMatrix L(n, n);
    for (int j = 0; j < n; ++j) {
        double diag = A.at(j, j);
        for (int k = 0; k < j; ++k) diag -= L.at(j, k) * L.at(j, k);
        if (diag <= 0.0)
            throw Error("dense_cholesky: not positive definite (pivot " +
                        std::to_string(j) + ")");
        const double ljj = std::sqrt(diag);
        L.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double sum = A.at(i, j);
            for (int k = 0; k < j; ++k) sum -= L.at(i, k) * L.at(j, k);
            L.at(i, j) = sum / ljj;
        }
    }
    return L;
}

std::vector<double> cholesky_solve(const DenseMatrix& lower, std::span<const double> b) {
    const int n = lower.n_rows;
    if (static_cast<int>(b.size()) != n)
        throw Error("cholesky_solve: vector length does not match factor size");
    std::vector<double> x(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        double sum = x[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) sum -= lower.at(i, k) * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = sum / lower.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double sum = x[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) sum -= lower.at(k, i) * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = sum / lower.at(i, i);
    }
    return x;
}

} // namespace precondnet
