#ifndef PRECONDNET_AMG_HPP
#define PRECONDNET_AMG_HPP

#include <memory>
#include <vector>

#include "precondnet/csr.hpp"
#include "precondnet/dense.hpp"
#include "precondnet/preconditioner.hpp"

namespace precondnet {

struct AmgParams {
    /// Strength threshold: (i,j) is strong iff |a_ij| > theta*sqrt(a_ii*a_jj).
    double theta = 0.08;
    /// Weight for the prolongation smoother and the V-cycle Jacobi smoother.
    double omega = 2.0 / 3.0;
    /// Aggregation stops once the coarse level is at most this size; the
    /// coarsest operator is factored densely.
    int coarse_size = 16;
    int max_levels = 32;
};

/// Greedy root-node aggregation over the strength graph. Returns the
/// aggregate id per node (always >= 0) and sets n_agg.
std::vector<int> aggregate_nodes(const CsrMatrix& A, double theta, int& n_agg);

/// Smoothed-aggregation AMG V-cycle preconditioner: Jacobi-smoothed
/// aggregate-indicator prolongation, Galerkin coarse operators, one pre-
/// and one post- weighted-Jacobi smoothing step per apply. Degenerate
/// aggregation at the finest level falls back to single-level Jacobi.
class AmgPreconditioner : public Preconditioner {
public:
    explicit AmgPreconditioner(const CsrMatrix& A, const AmgParams& params = {});

    PrecondKind kind() const override { return PrecondKind::amg; }
    int size() const override { return n_; }
    std::vector<double> apply(std::span<const double> v) const override;
    std::optional<double> density_hint() const override { return std::nullopt; }

    bool jacobi_fallback() const { return jacobi_fallback_; }
    /// Sizes of all levels, finest first (single entry when no coarsening).
    std::vector<int> level_sizes() const;

private:
    struct Level {
        CsrMatrix A;
        std::vector<double> inv_diag;
        CsrMatrix P;  // prolongation from the next-coarser level
        CsrMatrix Pt; // restriction
    };

    std::vector<double> vcycle(std::size_t level, std::span<const double> b) const;

    int n_ = 0;
    AmgParams params_;
    std::vector<Level> levels_;
    CsrMatrix coarsest_;
    std::vector<double> coarsest_inv_diag_;
    DenseMatrix coarsest_factor_; // dense Cholesky; empty => smooth instead
    bool coarsest_direct_ = false;
    bool jacobi_fallback_ = false;
    std::vector<double> fallback_inv_diag_;
};

std::unique_ptr<Preconditioner> amg_setup(const CsrMatrix& A, const AmgParams& params = {});

} // namespace precondnet

#endif
