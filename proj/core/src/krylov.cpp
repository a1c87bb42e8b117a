#include "precondnet/krylov.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "precondnet/dataset_io.hpp"
#include "precondnet/error.hpp"

namespace precondnet {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> initial_guess(const SolveOptions& opts, int n) {
    if (opts.x0.empty()) return std::vector<double>(static_cast<std::size_t>(n), 0.0);
    if (static_cast<int>(opts.x0.size()) != n)
        throw Error("cg: x0 length does not match system size");
    return opts.x0;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// One code path for CG and PCG; apply_precond is null for vanilla CG.
SolveReport run_cg(const CsrMatrix& A, std::span<const double> b,
                   const Preconditioner* M, const SolveOptions& opts) {
    const int n = A.n_rows;
    if (A.n_cols != n) throw Error("cg: matrix must be square");
    if (static_cast<int>(b.size()) != n)
        throw Error("cg: rhs length does not match system size");
    if (opts.tol <= 0.0) throw Error("cg: tol must be positive");

    const auto start = Clock::now();

    SolveReport report;
    report.x0 = initial_guess(opts, n);
    std::vector<double> x = report.x0;

    std::vector<double> r = spmv(A, x);
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];

    const double b_norm = norm2(b);
    const double threshold = opts.tol * b_norm;
    double r_norm = norm2(r);
    report.residual_history.push_back(r_norm);

    if (r_norm <= threshold) {
        report.converged = true;
        report.solution = std::move(x);
        report.wall_time_ms = elapsed_ms(start);
        return report;
    }

    std::vector<double> z = M ? M->apply(r) : r;
    std::vector<double> p = z;
    double rz = dot(r, z);
    std::vector<double> Ap(static_cast<std::size_t>(n));

    for (int j = 1; j <= opts.max_iter; ++j) {
        Ap = spmv(A, p);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0) throw Error("cg: matrix not SPD (p^T A p <= 0)");
        const double alpha = rz / pAp;

        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
        if (j % 50 == 0) {
            r = spmv(A, x); // curb drift of the recursive residual
            for (int i = 0; i < n; ++i)
                r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
        } else {
            for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] -= alpha * Ap[static_cast<std::size_t>(i)];
        }

        r_norm = norm2(r);
        report.residual_history.push_back(r_norm);
        report.iterations = j;
        if (opts.on_iterate) opts.on_iterate(j, x);

        if (r_norm <= threshold) {
            report.converged = true;
            break;
        }

        z = M ? M->apply(r) : r;
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
    }

    report.solution = std::move(x);
    report.wall_time_ms = elapsed_ms(start);
    return report;
}

} // namespace

SolveReport cg(const CsrMatrix& A, std::span<const double> b, const SolveOptions& opts) {
    return run_cg(A, b, nullptr, opts);
}

SolveReport pcg(const CsrMatrix& A, const Preconditioner& M, std::span<const double> b,
                const SolveOptions& opts) {
    if (M.size() != A.n_rows) throw Error("pcg: preconditioner size does not match matrix");
    return run_cg(A, b, &M, opts);
}

double cg_error_bound(double kappa, int j, double initial_error_A_norm) {
    if (kappa < 1.0) throw Error("cg_error_bound: kappa must be >= 1");
    if (j < 0) throw Error("cg_error_bound: iteration index must be >= 0");
    const double root = std::sqrt(kappa);
    const double ratio = (root - 1.0) / (root + 1.0);
    return 2.0 * std::pow(ratio, j) * initial_error_A_norm;
}

void write_residual_csv(const SolveReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_residual_csv: cannot open '" + path + "'");
    out << "iteration,residual\n";
    for (std::size_t j = 0; j < report.residual_history.size(); ++j)
        out << j << "," << format_value(report.residual_history[j]) << "\n";
}

} // namespace precondnet
