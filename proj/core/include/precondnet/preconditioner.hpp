#ifndef PRECONDNET_PRECONDITIONER_HPP
#define PRECONDNET_PRECONDITIONER_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "precondnet/csr.hpp"
#include "precondnet/dense.hpp"

namespace precondnet {

enum class PrecondKind { identity, jacobi, ic0, amg, learned };

const char* to_string(PrecondKind kind);

/// SPD operator v -> M^{-1} v. apply() must be linear and deterministic;
/// implementations are immutable after construction so concurrent applies
/// are safe.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;

    virtual PrecondKind kind() const = 0;
    virtual int size() const = 0;
    virtual std::vector<double> apply(std::span<const double> v) const = 0;

    /// nnz/n^2 of the explicitly stored operator, or nullopt when the
    /// operator is implicit (resolved by operator_density via probing).
    virtual std::optional<double> density_hint() const = 0;

    std::string name() const { return to_string(kind()); }
};

/// M^{-1} = I.
std::unique_ptr<Preconditioner> identity_precond(int n);

/// M^{-1} = diag(A)^{-1}. Throws on a non-positive diagonal entry.
std::unique_ptr<Preconditioner> jacobi_precond(const CsrMatrix& A);

/// Incomplete Cholesky with zero fill-in: lower factor restricted to the
/// pattern of tril(A), applied through two triangular solves. On pivot
/// breakdown the factorization is retried on A + alpha*diag(A) with alpha
/// in {shift0, 2*shift0, 4*shift0, ...}; persisting breakdown after 20
/// doublings throws.
class Ic0Preconditioner : public Preconditioner {
public:
    explicit Ic0Preconditioner(const CsrMatrix& A, double shift0 = 1e-3);

    PrecondKind kind() const override { return PrecondKind::ic0; }
    int size() const override { return factor_.n_rows; }
    std::vector<double> apply(std::span<const double> v) const override;
    std::optional<double> density_hint() const override;

    const CsrMatrix& factor() const { return factor_; }
    /// Diagonal shift that made the factorization succeed (0 on first try).
    double shift_used() const { return shift_used_; }

private:
    CsrMatrix factor_; // lower triangular, pattern of tril(A)
    double shift_used_ = 0.0;
};

std::unique_ptr<Preconditioner> ic0(const CsrMatrix& A, double shift0 = 1e-3);

/// Density of the effective operator M^{-1}: explicit operators report
/// nnz/n^2 directly; implicit ones are probed column-by-column with unit
/// vectors, counting entries with |value| > 1e-14 (size-capped).
double operator_density(const Preconditioner& P, int n);

/// Dense M^{-1}, formed from the explicit operator or by column probing.
DenseMatrix dense_operator(const Preconditioner& P);

} // namespace precondnet

#endif
