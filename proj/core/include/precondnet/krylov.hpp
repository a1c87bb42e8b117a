#ifndef PRECONDNET_KRYLOV_HPP
#define PRECONDNET_KRYLOV_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "precondnet/csr.hpp"
#include "precondnet/preconditioner.hpp"

namespace precondnet {

struct SolveOptions {
    double tol = 1e-6;   // relative: stop when ||r||_2 <= tol * ||b||_2
    int max_iter = 10000;
    std::vector<double> x0; // empty = zero initial guess
    /// Called after every iteration with (j, x_j); used by error-bound checks.
    std::function<void(int, const std::vector<double>&)> on_iterate;
};

/// Per-solve record. residual_history[j] is the unpreconditioned residual
/// 2-norm after iteration j (entry 0 is ||b - A*x0||).
struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
    double wall_time_ms = 0.0;
    std::optional<double> kappa;
    std::vector<double> solution;
    std::vector<double> x0;
};

/// Conjugate gradients for SPD A (caller-certified). The recursively updated
/// residual is replaced by the true residual b - A*x every 50 iterations.
/// Throws "matrix not SPD" when p^T A p <= 0 is encountered.
SolveReport cg(const CsrMatrix& A, std::span<const double> b, const SolveOptions& opts = {});

/// Preconditioned conjugate gradients, z = M^{-1} r each iteration. Returns
/// the solution of the original system; the stopping test uses the
/// unpreconditioned residual.
SolveReport pcg(const CsrMatrix& A, const Preconditioner& M, std::span<const double> b,
                const SolveOptions& opts = {});

/// A-priori bound on the A-norm error after j CG iterations:
/// 2 * [(sqrt(kappa)-1)/(sqrt(kappa)+1)]^j * initial_error_A_norm.
double cg_error_bound(double kappa, int j, double initial_error_A_norm);

/// Residual history CSV with header "iteration,residual".
void write_residual_csv(const SolveReport& report, const std::string& path);

} // namespace precondnet

#endif
