#include "precondnet/preconditioner.hpp"

#include <cmath>
#include <string>

#include "precondnet/config.hpp"
#include "precondnet/error.hpp"

namespace precondnet {

const char* to_string(PrecondKind kind) {
    switch (kind) {
        case PrecondKind::identity: return "vanilla";
        case PrecondKind::jacobi: return "jacobi";
        case PrecondKind::ic0: return "ic0";
        case PrecondKind::amg: return "amg";
        case PrecondKind::learned: return "learned";
    }
    return "unknown";
}

namespace {

class IdentityPreconditioner : public Preconditioner {
public:
    explicit IdentityPreconditioner(int n) : n_(n) {}
    PrecondKind kind() const override { return PrecondKind::identity; }
    int size() const override { return n_; }
    std::vector<double> apply(std::span<const double> v) const override {
        return {v.begin(), v.end()};
    }
    std::optional<double> density_hint() const override {
        return 1.0 / static_cast<double>(n_);
    }

private:
    int n_;
};

class JacobiPreconditioner : public Preconditioner {
public:
    explicit JacobiPreconditioner(const CsrMatrix& A) {
        const auto diag = diagonal(A);
        inv_diag_.resize(diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) {
            if (diag[i] <= 0.0)
                throw Error("jacobi_precond: non-positive diagonal entry at row " +
                            std::to_string(i));
            inv_diag_[i] = 1.0 / diag[i];
        }
    }
    PrecondKind kind() const override { return PrecondKind::jacobi; }
    int size() const override { return static_cast<int>(inv_diag_.size()); }
    std::vector<double> apply(std::span<const double> v) const override {
        std::vector<double> z(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = inv_diag_[i] * v[i];
        return z;
    }
    std::optional<double> density_hint() const override {
        return 1.0 / static_cast<double>(inv_diag_.size());
    }

private:
    std::vector<double> inv_diag_;
};

/// IC(0) numeric pass on the pattern of tril(A), diagonal scaled by
/// (1 + shift). Returns false on pivot breakdown.
bool try_ic0(const CsrMatrix& A, double shift, CsrMatrix& out) {
    CsrMatrix L = lower_with_diag(A);
    const int n = L.n_rows;
    for (int i = 0; i < n; ++i) {
        const int row_begin = L.row_ptr[i];
        const int row_end = L.row_ptr[i + 1];
        if (row_end == row_begin || L.col_idx[row_end - 1] != i) return false; // missing diagonal
        for (int k = row_begin; k < row_end; ++k) {
            const int j = L.col_idx[k];
            double sum = A.at(i, j);
            if (j == i) sum *= 1.0 + shift;
            // dot of rows i and j of L over shared columns < j
            int pi = row_begin;
            int pj = L.row_ptr[j];
            const int pj_end = L.row_ptr[j + 1];
            while (pi < k && pj < pj_end && L.col_idx[pj] < j) {
                if (L.col_idx[pi] == L.col_idx[pj]) {
                    sum -= L.values[pi] * L.values[pj];
                    ++pi;
                    ++pj;
                } else if (L.col_idx[pi] < L.col_idx[pj]) {
                    ++pi;
                } else {
                    ++pj;
                }
            }
            if (j == i) {
                if (sum <= 0.0) return false;
                L.values[k] = std::sqrt(sum);
            } else {
                L.values[k] = sum / L.values[L.row_ptr[j + 1] - 1];
            }
        }
    }
    out = std::move(L);
    return true;
}

} // namespace

Ic0Preconditioner::Ic0Preconditioner(const CsrMatrix& A, double shift0) {
    if (A.n_rows != A.n_cols) throw Error("ic0: matrix must be square");
    if (try_ic0(A, 0.0, factor_)) {
        shift_used_ = 0.0;
        return;
    }
    double alpha = shift0;
    for (int attempt = 0; attempt <= 20; ++attempt, alpha *= 2.0) {
        if (try_ic0(A, alpha, factor_)) {
            shift_used_ = alpha;
            return;
        }
    }
    throw Error("ic0: breakdown persisting after 20 shift doublings");
}

std::vector<double> Ic0Preconditioner::apply(std::span<const double> v) const {
    // M^{-1} v = (L L^T)^{-1} v via two triangular solves
    auto y = lower_solve(factor_, v, false);
    return lower_solve(factor_, y, true);
}

std::optional<double> Ic0Preconditioner::density_hint() const {
    return density(factor_);
}

std::unique_ptr<Preconditioner> identity_precond(int n) {
    return std::make_unique<IdentityPreconditioner>(n);
}

std::unique_ptr<Preconditioner> jacobi_precond(const CsrMatrix& A) {
    return std::make_unique<JacobiPreconditioner>(A);
}

std::unique_ptr<Preconditioner> ic0(const CsrMatrix& A, double shift0) {
    return std::make_unique<Ic0Preconditioner>(A, shift0);
}

double operator_density(const Preconditioner& P, int n) {
    if (const auto hint = P.density_hint()) return *hint;
    if (n > dense_cap())
        throw Error("operator_density: size " + std::to_string(n) +
                    " exceeds dense workspace cap for implicit operators");
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    long long nnz = 0;
    for (int j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        const auto col = P.apply(e);
        e[static_cast<std::size_t>(j)] = 0.0;
        for (double v : col)
            if (std::abs(v) > 1e-14) ++nnz;
    }
    return static_cast<double>(nnz) / (static_cast<double>(n) * static_cast<double>(n));
}

DenseMatrix dense_operator(const Preconditioner& P) {
    const int n = P.size();
    if (n > dense_cap())
        throw Error("dense_operator: size " + std::to_string(n) +
                    " exceeds dense workspace cap");
    DenseMatrix M(n, n);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        const auto col = P.apply(e);
        e[static_cast<std::size_t>(j)] = 0.0;
        for (int i = 0; i < n; ++i) M.at(i, j) = col[static_cast<std::size_t>(i)];
    }
    return M;
}

} // namespace precondnet
