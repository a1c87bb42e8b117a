#include "precondnet/amg.hpp"

#include <cmath>

#include "precondnet/config.hpp"
#include "precondnet/error.hpp"

namespace precondnet {

std::vector<int> aggregate_nodes(const CsrMatrix& A, double theta, int& n_agg) {
    const int n = A.n_rows;
    const auto diag = diagonal(A);

    // Strong neighbors per node: |a_ij| > theta * sqrt(a_ii * a_jj), i != j.
    std::vector<std::vector<int>> strong(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int j = A.col_idx[k];
            if (j == i) continue;
            const double bound =
                theta * std::sqrt(std::abs(diag[static_cast<std::size_t>(i)]) *
                                  std::abs(diag[static_cast<std::size_t>(j)]));
            if (std::abs(A.values[k]) > bound) strong[static_cast<std::size_t>(i)].push_back(j);
        }
    }

    std::vector<int> agg(static_cast<std::size_t>(n), -1);
    n_agg = 0;

    // Phase 1: roots whose strong neighborhood is untouched seed aggregates.
    for (int i = 0; i < n; ++i) {
        if (agg[static_cast<std::size_t>(i)] >= 0) continue;
        bool free = true;
        for (int j : strong[static_cast<std::size_t>(i)])
            if (agg[static_cast<std::size_t>(j)] >= 0) { free = false; break; }
        if (!free) continue;
        const int id = n_agg++;
        agg[static_cast<std::size_t>(i)] = id;
        for (int j : strong[static_cast<std::size_t>(i)]) agg[static_cast<std::size_t>(j)] = id;
    }

    // Phase 2: attach leftovers to the first aggregated strong neighbor.
    for (int i = 0; i < n; ++i) {
        if (agg[static_cast<std::size_t>(i)] >= 0) continue;
        for (int j : strong[static_cast<std::size_t>(i)]) {
            if (agg[static_cast<std::size_t>(j)] >= 0) {
                agg[static_cast<std::size_t>(i)] = agg[static_cast<std::size_t>(j)];
                break;
            }
        }
    }

    // Phase 3: whatever remains becomes singleton aggregates.
    for (int i = 0; i < n; ++i)
        if (agg[static_cast<std::size_t>(i)] < 0) agg[static_cast<std::size_t>(i)] = n_agg++;

    return agg;
}

namespace {

std::vector<double> inverse_diagonal(const CsrMatrix& A) {
    auto d = diagonal(A);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= 0.0)
            throw Error("amg_setup: non-positive diagonal at row " + std::to_string(i));
        d[i] = 1.0 / d[i];
    }
    return d;
}

/// Jacobi-smoothed aggregate indicator: P = (I - omega D^{-1} A) P0.
CsrMatrix smoothed_prolongation(const CsrMatrix& A, const std::vector<int>& agg,
                                int n_agg, double omega,
                                const std::vector<double>& inv_diag) {
    std::vector<CooEntry> entries;
    std::vector<double> row_acc(static_cast<std::size_t>(n_agg), 0.0);
    std::vector<int> touched;
    for (int i = 0; i < A.n_rows; ++i) {
        touched.clear();
        // -omega D^{-1} A P0 contribution
        const double scale = -omega * inv_diag[static_cast<std::size_t>(i)];
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int c = agg[static_cast<std::size_t>(A.col_idx[k])];
            if (row_acc[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
            row_acc[static_cast<std::size_t>(c)] += scale * A.values[k];
        }
        // + P0 contribution
        const int ci = agg[static_cast<std::size_t>(i)];
        if (row_acc[static_cast<std::size_t>(ci)] == 0.0) touched.push_back(ci);
        row_acc[static_cast<std::size_t>(ci)] += 1.0;

        for (int c : touched) {
            if (row_acc[static_cast<std::size_t>(c)] != 0.0)
                entries.push_back({i, c, row_acc[static_cast<std::size_t>(c)]});
            row_acc[static_cast<std::size_t>(c)] = 0.0;
        }
    }
    return csr_from_coo(entries, A.n_rows, n_agg);
}

/// Galerkin product P^T A P.
CsrMatrix galerkin(const CsrMatrix& A, const CsrMatrix& P, const CsrMatrix& Pt) {
    const int nc = P.n_cols;
    // B = A P, built row by row.
    std::vector<CooEntry> b_entries;
    {
        std::vector<double> acc(static_cast<std::size_t>(nc), 0.0);
        std::vector<int> touched;
        for (int i = 0; i < A.n_rows; ++i) {
            touched.clear();
            for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
                const int j = A.col_idx[k];
                const double aij = A.values[k];
                for (int kp = P.row_ptr[j]; kp < P.row_ptr[j + 1]; ++kp) {
                    const int c = P.col_idx[kp];
                    if (acc[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
                    acc[static_cast<std::size_t>(c)] += aij * P.values[kp];
                }
            }
            for (int c : touched) {
                if (acc[static_cast<std::size_t>(c)] != 0.0)
                    b_entries.push_back({i, c, acc[static_cast<std::size_t>(c)]});
                acc[static_cast<std::size_t>(c)] = 0.0;
            }
        }
    }
    const CsrMatrix B = csr_from_coo(b_entries, A.n_rows, nc);

    // A_c = P^T B via rows of Pt.
    std::vector<CooEntry> c_entries;
    {
        std::vector<double> acc(static_cast<std::size_t>(nc), 0.0);
        std::vector<int> touched;
        for (int c = 0; c < nc; ++c) {
            touched.clear();
            for (int k = Pt.row_ptr[c]; k < Pt.row_ptr[c + 1]; ++k) {
                const int i = Pt.col_idx[k];
                const double pic = Pt.values[k];
                for (int kb = B.row_ptr[i]; kb < B.row_ptr[i + 1]; ++kb) {
                    const int j = B.col_idx[kb];
                    if (acc[static_cast<std::size_t>(j)] == 0.0) touched.push_back(j);
                    acc[static_cast<std::size_t>(j)] += pic * B.values[kb];
                }
            }
            for (int j : touched) {
                if (acc[static_cast<std::size_t>(j)] != 0.0)
                    c_entries.push_back({c, j, acc[static_cast<std::size_t>(j)]});
                acc[static_cast<std::size_t>(j)] = 0.0;
            }
        }
    }
    CsrMatrix Ac = csr_from_coo(c_entries, nc, nc);

    // Make the Galerkin operator exactly symmetric (rounding in the two
    // product passes may leave eps-level asymmetry).
    const CsrMatrix AcT = transpose(Ac);
    std::vector<CooEntry> sym;
    sym.reserve(static_cast<std::size_t>(Ac.nnz()));
    for (const auto& e : to_coo(Ac)) sym.push_back({e.row, e.col, 0.5 * e.value});
    for (const auto& e : to_coo(AcT)) sym.push_back({e.row, e.col, 0.5 * e.value});
    return csr_from_coo(sym, nc, nc);
}

} // namespace

AmgPreconditioner::AmgPreconditioner(const CsrMatrix& A, const AmgParams& params)
    : n_(A.n_rows), params_(params) {
    if (A.n_rows != A.n_cols) throw Error("amg_setup: matrix must be square");

    fallback_inv_diag_ = inverse_diagonal(A);

    try {
        CsrMatrix current = A;
        bool stalled = false;
        // aggregate at least once, then until the coarse size bound is met
        while (static_cast<int>(levels_.size()) < params_.max_levels &&
               (levels_.empty() || current.n_rows > params_.coarse_size)) {
            int n_agg = 0;
            const auto agg = aggregate_nodes(current, params_.theta, n_agg);
            if (n_agg >= current.n_rows) { // no coarsening progress
                stalled = true;
                break;
            }
            Level level;
            level.inv_diag = inverse_diagonal(current);
            level.P = smoothed_prolongation(current, agg, n_agg, params_.omega,
                                            level.inv_diag);
            level.Pt = transpose(level.P);
            CsrMatrix coarse = galerkin(current, level.P, level.Pt);
            level.A = std::move(current);
            current = std::move(coarse);
            levels_.push_back(std::move(level));
        }

        if (stalled && levels_.empty()) {
            jacobi_fallback_ = true; // degenerate aggregation on the finest level
            return;
        }

        coarsest_ = std::move(current);
        coarsest_inv_diag_ = inverse_diagonal(coarsest_);
        if (coarsest_.n_rows <= dense_cap()) {
            coarsest_factor_ = dense_cholesky(to_dense(coarsest_));
            coarsest_direct_ = true;
        }
    } catch (const Error&) {
        levels_.clear();
        jacobi_fallback_ = true;
    }
}

std::vector<int> AmgPreconditioner::level_sizes() const {
    std::vector<int> sizes;
    if (jacobi_fallback_) {
        sizes.push_back(n_);
        return sizes;
    }
    for (const auto& level : levels_) sizes.push_back(level.A.n_rows);
    sizes.push_back(coarsest_.n_rows);
    return sizes;
}

std::vector<double> AmgPreconditioner::vcycle(std::size_t idx,
                                              std::span<const double> b) const {
    if (idx == levels_.size()) {
        if (coarsest_direct_) return cholesky_solve(coarsest_factor_, b);
        // coarsest level too large to factor densely: smooth instead
        std::vector<double> x(b.size(), 0.0);
        for (int sweep = 0; sweep < 10; ++sweep) {
            auto r = spmv(coarsest_, x);
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += params_.omega * coarsest_inv_diag_[i] * (b[i] - r[i]);
        }
        return x;
    }

    const Level& level = levels_[idx];
    const std::size_t n = static_cast<std::size_t>(level.A.n_rows);

    // pre-smooth from zero initial guess
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = params_.omega * level.inv_diag[i] * b[i];

    // coarse correction
    std::vector<double> r = spmv(level.A, x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const auto rc = spmv(level.Pt, r);
    const auto xc = vcycle(idx + 1, rc);
    const auto correction = spmv(level.P, xc);
    for (std::size_t i = 0; i < n; ++i) x[i] += correction[i];

    // post-smooth
    r = spmv(level.A, x);
    for (std::size_t i = 0; i < n; ++i)
        x[i] += params_.omega * level.inv_diag[i] * (b[i] - r[i]);
    return x;
}

std::vector<double> AmgPreconditioner::apply(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != n_)
        throw Error("amg apply: vector length does not match operator size");
    if (jacobi_fallback_) {
        std::vector<double> z(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = fallback_inv_diag_[i] * v[i];
        return z;
    }
    return vcycle(0, v);
}

std::unique_ptr<Preconditioner> amg_setup(const CsrMatrix& A, const AmgParams& params) {
    return std::make_unique<AmgPreconditioner>(A, params);
}

} // namespace precondnet
