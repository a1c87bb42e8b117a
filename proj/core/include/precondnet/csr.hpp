#ifndef PRECONDNET_CSR_HPP
#define PRECONDNET_CSR_HPP

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace precondnet {

/// One explicit entry of a sparse matrix in coordinate form.
struct CooEntry {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Compressed sparse row matrix, double precision. Immutable after
/// construction: row_ptr is non-decreasing with row_ptr[0] == 0 and
/// row_ptr[n_rows] == nnz, column indices are strictly increasing within
/// each row, and no explicit zeros are stored (exact zeros are pruned when
/// building from coordinates).
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_ptr;   // length n_rows + 1
    std::vector<int> col_idx;   // length nnz, sorted within each row
    std::vector<double> values; // length nnz

    CsrMatrix() : row_ptr(1, 0) {}
    CsrMatrix(int rows, int cols) : n_rows(rows), n_cols(cols), row_ptr(rows + 1, 0) {}

    int nnz() const { return static_cast<int>(values.size()); }

    /// Value at (i, j), 0 if the entry is not stored. Binary search in row i.
    double at(int i, int j) const;

    static CsrMatrix identity(int n);
};

/// Build a CSR matrix from coordinate entries. Duplicates are summed, exact
/// zeros remaining after summation are pruned, rows come out sorted.
/// Throws on out-of-range indices.
CsrMatrix csr_from_coo(std::span<const CooEntry> entries, int n_rows, int n_cols);

/// Canonical coordinate list (row-major, sorted) of all stored entries.
std::vector<CooEntry> to_coo(const CsrMatrix& A);

/// y = A * x. Pattern-driven accumulation, left-to-right within each row.
std::vector<double> spmv(const CsrMatrix& A, std::span<const double> x);

/// y = A^T * x, without forming the transpose.
std::vector<double> spmv_transpose(const CsrMatrix& A, std::span<const double> x);

CsrMatrix transpose(const CsrMatrix& A);

/// Exact structural + value symmetry.
bool is_symmetric(const CsrMatrix& A);

/// Solve Lfac * x = b (or Lfac^T * x = b when transpose is set) by forward /
/// backward substitution. Lfac must be lower triangular with strictly
/// positive diagonal; otherwise throws "singular factor".
std::vector<double> lower_solve(const CsrMatrix& Lfac, std::span<const double> b,
                                bool transpose = false);

/// nnz / (n_rows * n_cols).
double density(const CsrMatrix& A);

/// Strictly lower triangular part.
CsrMatrix strict_lower(const CsrMatrix& A);

/// Lower triangular part including the diagonal.
CsrMatrix lower_with_diag(const CsrMatrix& A);

/// Stored diagonal entries (0 where the diagonal is not stored).
std::vector<double> diagonal(const CsrMatrix& A);

} // namespace precondnet

#endif
