#ifndef PRECONDNET_SPD_ASSEMBLY_HPP
#define PRECONDNET_SPD_ASSEMBLY_HPP

#include <memory>

#include "precondnet/csr.hpp"
#include "precondnet/dense.hpp"
#include "precondnet/feature_map.hpp"
#include "precondnet/preconditioner.hpp"

namespace precondnet {

/// Hard threshold on the factor diagonal; guarantees a valid Cholesky-form
/// SPD operator for any raw model output.
inline constexpr double kDiagEpsilon = 1e-3;

/// M^{-1} = (T + D)(T + D)^T with T the strictly lower part of the raw map
/// and D = max(diag(raw), epsilon) elementwise. The operator is applied
/// through its factor and never formed densely except for reporting.
struct SpdFactors {
    CsrMatrix T;            // strictly lower triangular
    std::vector<double> D;  // length n, all entries >= epsilon
    double epsilon = kDiagEpsilon;
    CsrMatrix factor;       // T + diag(D), lower triangular

    int size() const { return factor.n_rows; }

    /// M^{-1} v = factor * (factor^T * v).
    std::vector<double> apply(std::span<const double> v) const;
};

/// Assemble the SPD operator from a single-channel square raw map. The
/// strictly upper triangle of the raw output is discarded; diagonal entries
/// absent from the active set clamp to epsilon.
SpdFactors spd_assemble(const FeatureMap& raw, double epsilon = kDiagEpsilon);

/// Same, from a support grid plus one value per site (avoids a map copy on
/// hot paths).
SpdFactors spd_assemble(const SiteGrid& support, std::span<const double> values,
                        double epsilon = kDiagEpsilon);

/// Dense M^{-1} = F F^T, for condition-number reporting only.
DenseMatrix dense_minv(const SpdFactors& factors);

/// Smallest eigenvalue of M^{-1}, evaluated as sigma_min(factor)^2. The
/// factored form is exact (lambda_min(F F^T) = sigma_min(F)^2) and keeps
/// tiny eigenvalues positive where a direct eigensolve on F F^T would drown
/// them in rounding noise.
double min_eigenvalue(const SpdFactors& factors);

class LearnedPreconditioner : public Preconditioner {
public:
    explicit LearnedPreconditioner(SpdFactors factors) : factors_(std::move(factors)) {}

    PrecondKind kind() const override { return PrecondKind::learned; }
    int size() const override { return factors_.size(); }
    std::vector<double> apply(std::span<const double> v) const override {
        return factors_.apply(v);
    }
    std::optional<double> density_hint() const override {
        return density(factors_.factor);
    }

    const SpdFactors& factors() const { return factors_; }

private:
    SpdFactors factors_;
};

std::unique_ptr<Preconditioner> learned_precond(SpdFactors factors);

} // namespace precondnet

#endif
