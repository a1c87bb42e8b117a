#ifndef PRECONDNET_EVALUATE_HPP
#define PRECONDNET_EVALUATE_HPP

#include <string>
#include <vector>

#include "precondnet/cnn.hpp"
#include "precondnet/krylov.hpp"
#include "precondnet/poisson.hpp"
#include "precondnet/preconditioner.hpp"

namespace precondnet {

struct EvalOptions {
    double tol = 1e-6;
    int max_iter = 10000;
    /// Condition number reporting requires a dense SVD per sample; callers
    /// that only need iteration counts can switch it off.
    bool compute_kappa = true;
};

/// Per-sample record of one method evaluation; the flat row persisted to the
/// audit CSV and the sole input of summarize().
struct AuditRow {
    std::string method;
    int sample_id = 0;
    double time_ms = 0.0;   // solve time
    double setup_ms = 0.0;  // preconditioner construction, logged separately
    int iterations = 0;
    double kappa = 0.0;     // NaN when not computed
    double density = 0.0;
    bool converged = false;
};

struct MethodEvaluation {
    AuditRow row;
    SolveReport solve;
};

/// The four columns of the comparison tables, averaged per method.
struct MethodSummary {
    std::string method;
    double time_ms = 0.0;
    double iterations = 0.0; // fractional mean
    double kappa = 0.0;
    double density = 0.0;
    int sample_count = 0;
};

PrecondKind parse_method(const std::string& name);

/// Build the preconditioner for one sample (the learned model is evaluated
/// once per sample and reused), run cg/pcg, fill kappa and density.
/// method == learned requires model parameters.
MethodEvaluation evaluate_method(const PoissonSample& sample, int sample_id,
                                 PrecondKind method, const CnnParams* model,
                                 const EvalOptions& opts = {});

/// Arithmetic means per method, in first-appearance order. All methods must
/// cover the identical sample-id sequence; mismatched sets throw.
std::vector<MethodSummary> summarize(const std::vector<AuditRow>& rows);

/// Summary CSV: "method,time_ms,iter,kappa,density".
void write_summary_csv(const std::vector<MethodSummary>& summaries, const std::string& path);

/// Audit CSV: "method,sample,time_ms,setup_ms,iter,kappa,density,converged".
void write_audit_csv(const std::vector<AuditRow>& rows, const std::string& path);
std::vector<AuditRow> read_audit_csv(const std::string& path);

} // namespace precondnet

#endif
