#include "precondnet/csr.hpp"

#include <algorithm>
#include <string>

#include "precondnet/error.hpp"

namespace precondnet {

double CsrMatrix::at(int i, int j) const {
    const int lo = row_ptr[i];
    const int hi = row_ptr[i + 1];
    const auto begin = col_idx.begin() + lo;
    const auto end = col_idx.begin() + hi;
    const auto it = std::lower_bound(begin, end, j);
    if (it != end && *it == j) return values[static_cast<std::size_t>(it - col_idx.begin())];
    return 0.0;
}

CsrMatrix CsrMatrix::identity(int n) {
    CsrMatrix I(n, n);
    I.col_idx.resize(n);
    I.values.assign(n, 1.0);
    for (int i = 0; i < n; ++i) {
        I.row_ptr[i + 1] = i + 1;
        I.col_idx[i] = i;
    }
    return I;
}

CsrMatrix csr_from_coo(std::span<const CooEntry> entries, int n_rows, int n_cols) {
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols) {
            throw Error("csr_from_coo: index (" + std::to_string(e.row) + ", " +
                        std::to_string(e.col) + ") out of range for " +
                        std::to_string(n_rows) + "x" + std::to_string(n_cols));
        }
    }
    std::vector<CooEntry> sorted(entries.begin(), entries.end());
    // stable: duplicates are summed in insertion order, keeping builds
    // bit-reproducible
    std::stable_sort(sorted.begin(), sorted.end(), [](const CooEntry& a, const CooEntry& b) {
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });

    CsrMatrix A(n_rows, n_cols);
    std::size_t k = 0;
    for (int i = 0; i < n_rows; ++i) {
        while (k < sorted.size() && sorted[k].row == i) {
            const int j = sorted[k].col;
            double sum = 0.0;
            while (k < sorted.size() && sorted[k].row == i && sorted[k].col == j) {
                sum += sorted[k].value;
                ++k;
            }
            if (sum != 0.0) { // exact-zero pruning only
                A.col_idx.push_back(j);
                A.values.push_back(sum);
            }
        }
        A.row_ptr[i + 1] = static_cast<int>(A.values.size());
    }
    return A;
}

std::vector<CooEntry> to_coo(const CsrMatrix& A) {
    std::vector<CooEntry> out;
    out.reserve(A.values.size());
    for (int i = 0; i < A.n_rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            out.push_back({i, A.col_idx[k], A.values[k]});
    return out;
}

std::vector<double> spmv(const CsrMatrix& A, std::span<const double> x) {
    if (static_cast<int>(x.size()) != A.n_cols)
        throw Error("spmv: vector length " + std::to_string(x.size()) +
                    " does not match n_cols " + std::to_string(A.n_cols));
    std::vector<double> y(static_cast<std::size_t>(A.n_rows));
    for (int i = 0; i < A.n_rows; ++i) {
        double sum = 0.0;
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            sum += A.values[k] * x[static_cast<std::size_t>(A.col_idx[k])];
        y[static_cast<std::size_t>(i)] = sum;
    }
    return y;
}

std::vector<double> spmv_transpose(const CsrMatrix& A, std::span<const double> x) {
    if (static_cast<int>(x.size()) != A.n_rows)
        throw Error("spmv_transpose: vector length " + std::to_string(x.size()) +
                    " does not match n_rows " + std::to_string(A.n_rows));
    std::vector<double> y(static_cast<std::size_t>(A.n_cols), 0.0);
    for (int i = 0; i < A.n_rows; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            y[static_cast<std::size_t>(A.col_idx[k])] += A.values[k] * xi;
    }
    return y;
}

CsrMatrix transpose(const CsrMatrix& A) {
    CsrMatrix T(A.n_cols, A.n_rows);
    std::vector<int> count(static_cast<std::size_t>(A.n_cols), 0);
    for (int j : A.col_idx) ++count[static_cast<std::size_t>(j)];
    for (int j = 0; j < A.n_cols; ++j) T.row_ptr[j + 1] = T.row_ptr[j] + count[static_cast<std::size_t>(j)];
    T.col_idx.resize(A.values.size());
    T.values.resize(A.values.size());
    std::vector<int> next(T.row_ptr.begin(), T.row_ptr.end() - 1);
    for (int i = 0; i < A.n_rows; ++i) {
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int j = A.col_idx[k];
            const int pos = next[static_cast<std::size_t>(j)]++;
            T.col_idx[static_cast<std::size_t>(pos)] = i;
            T.values[static_cast<std::size_t>(pos)] = A.values[k];
        }
    }
    return T;
}

bool is_symmetric(const CsrMatrix& A) {
    if (A.n_rows != A.n_cols) return false;
    const CsrMatrix T = transpose(A);
    return T.row_ptr == A.row_ptr && T.col_idx == A.col_idx && T.values == A.values;
}

std::vector<double> lower_solve(const CsrMatrix& Lfac, std::span<const double> b,
                                bool transpose) {
    const int n = Lfac.n_rows;
    if (Lfac.n_cols != n) throw Error("lower_solve: factor must be square");
    if (static_cast<int>(b.size()) != n)
        throw Error("lower_solve: vector length does not match factor size");

    // The diagonal must be the last stored entry of each row of a lower
    // triangular factor; verify position and positivity.
    for (int i = 0; i < n; ++i) {
        const int hi = Lfac.row_ptr[i + 1];
        if (hi == Lfac.row_ptr[i] || Lfac.col_idx[hi - 1] != i ||
            Lfac.values[hi - 1] <= 0.0)
            throw Error("lower_solve: singular factor (row " + std::to_string(i) + ")");
    }

    std::vector<double> x(b.begin(), b.end());
    if (!transpose) {
        for (int i = 0; i < n; ++i) {
            double sum = x[static_cast<std::size_t>(i)];
            const int hi = Lfac.row_ptr[i + 1] - 1; // diagonal excluded
            for (int k = Lfac.row_ptr[i]; k < hi; ++k)
                sum -= Lfac.values[k] * x[static_cast<std::size_t>(Lfac.col_idx[k])];
            x[static_cast<std::size_t>(i)] = sum / Lfac.values[hi];
        }
    } else {
        // Solve Lfac^T x = b by sweeping columns of Lfac backwards.
        for (int i = n - 1; i >= 0; --i) {
            const int hi = Lfac.row_ptr[i + 1] - 1;
            x[static_cast<std::size_t>(i)] /= Lfac.values[hi];
            const double xi = x[static_cast<std::size_t>(i)];
            for (int k = Lfac.row_ptr[i]; k < hi; ++k)
                x[static_cast<std::size_t>(Lfac.col_idx[k])] -= Lfac.values[k] * xi;
        }
    }
    return x;
}

double density(const CsrMatrix& A) {
    if (A.n_rows == 0 || A.n_cols == 0) return 0.0;
    return static_cast<double>(A.nnz()) /
           (static_cast<double>(A.n_rows) * static_cast<double>(A.n_cols));
}

namespace {

CsrMatrix filter_lower(const CsrMatrix& A, bool keep_diag) {
    CsrMatrix L(A.n_rows, A.n_cols);
    for (int i = 0; i < A.n_rows; ++i) {
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int j = A.col_idx[k];
            if (j < i || (keep_diag && j == i)) {
                L.col_idx.push_back(j);
                L.values.push_back(A.values[k]);
            }
        }
        L.row_ptr[i + 1] = static_cast<int>(L.values.size());
    }
    return L;
}

} // namespace

CsrMatrix strict_lower(const CsrMatrix& A) { return filter_lower(A, false); }

CsrMatrix lower_with_diag(const CsrMatrix& A) { return filter_lower(A, true); }

std::vector<double> diagonal(const CsrMatrix& A) {
    const int n = std::min(A.n_rows, A.n_cols);
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = A.at(i, i);
    return d;
}

} // namespace precondnet
