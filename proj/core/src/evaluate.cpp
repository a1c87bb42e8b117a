#include "precondnet/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "precondnet/amg.hpp"
#include "precondnet/dataset_io.hpp"
#include "precondnet/error.hpp"
#include "precondnet/spd_assembly.hpp"
#include "precondnet/spectral.hpp"

namespace precondnet {

PrecondKind parse_method(const std::string& name) {
    if (name == "vanilla") return PrecondKind::identity;
    if (name == "jacobi") return PrecondKind::jacobi;
    if (name == "ic0") return PrecondKind::ic0;
    if (name == "amg") return PrecondKind::amg;
    if (name == "learned") return PrecondKind::learned;
    throw Error("unknown method '" + name +
                "' (expected vanilla, jacobi, ic0, amg or learned)");
}

namespace {

std::unique_ptr<Preconditioner> build_preconditioner(const PoissonSample& sample,
                                                     PrecondKind method,
                                                     const CnnParams* model) {
    switch (method) {
        case PrecondKind::identity: return identity_precond(sample.A.n_rows);
        case PrecondKind::jacobi: return jacobi_precond(sample.A);
        case PrecondKind::ic0: return ic0(sample.A);
        case PrecondKind::amg: return amg_setup(sample.A);
        case PrecondKind::learned: {
            if (!model)
                throw Error("evaluate_method: learned method requires a checkpoint");
            const FeatureMap raw = model_forward(*model, sample.A);
            return learned_precond(spd_assemble(raw));
        }
    }
    throw Error("evaluate_method: unknown method");
}

} // namespace

MethodEvaluation evaluate_method(const PoissonSample& sample, int sample_id,
                                 PrecondKind method, const CnnParams* model,
                                 const EvalOptions& opts) {
    using Clock = std::chrono::steady_clock;

    const auto setup_start = Clock::now();
    const auto P = build_preconditioner(sample, method, model);
    const double setup_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - setup_start).count();

    SolveOptions solve_opts;
    solve_opts.tol = opts.tol;
    solve_opts.max_iter = opts.max_iter;

    MethodEvaluation eval;
    eval.solve = method == PrecondKind::identity ? cg(sample.A, sample.b, solve_opts)
                                                 : pcg(sample.A, *P, sample.b, solve_opts);

    if (opts.compute_kappa) {
        const DenseMatrix minv = dense_operator(*P);
        eval.solve.kappa = condition_number(spmm(sample.A, minv)).kappa();
    }

    eval.row.method = to_string(method);
    eval.row.sample_id = sample_id;
    eval.row.time_ms = eval.solve.wall_time_ms;
    eval.row.setup_ms = setup_ms;
    eval.row.iterations = eval.solve.iterations;
    eval.row.kappa =
        eval.solve.kappa.value_or(std::numeric_limits<double>::quiet_NaN());
    eval.row.density = operator_density(*P, sample.A.n_rows);
    eval.row.converged = eval.solve.converged;
    return eval;
}

std::vector<MethodSummary> summarize(const std::vector<AuditRow>& rows) {
    std::vector<MethodSummary> summaries;
    std::vector<std::vector<int>> sample_ids;

    for (const auto& row : rows) {
        std::size_t m = 0;
        for (; m < summaries.size(); ++m)
            if (summaries[m].method == row.method) break;
        if (m == summaries.size()) {
            summaries.push_back({row.method, 0.0, 0.0, 0.0, 0.0, 0});
            sample_ids.emplace_back();
        }
        MethodSummary& s = summaries[m];
        s.time_ms += row.time_ms;
        s.iterations += row.iterations;
        s.kappa += row.kappa;
        s.density += row.density;
        s.sample_count += 1;
        sample_ids[m].push_back(row.sample_id);
    }

    for (std::size_t m = 1; m < summaries.size(); ++m)
        if (sample_ids[m] != sample_ids[0])
            throw Error("summarize: methods '" + summaries[0].method + "' and '" +
                        summaries[m].method + "' cover different sample sets");

    for (auto& s : summaries) {
        const double n = static_cast<double>(s.sample_count);
        s.time_ms /= n;
        s.iterations /= n;
        s.kappa /= n;
        s.density /= n;
    }
    return summaries;
}

void write_summary_csv(const std::vector<MethodSummary>& summaries,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_summary_csv: cannot open '" + path + "'");
    out << "method,time_ms,iter,kappa,density\n";
    for (const auto& s : summaries)
        out << s.method << "," << format_value(s.time_ms) << ","
            << format_value(s.iterations) << "," << format_value(s.kappa) << ","
            << format_value(s.density) << "\n";
}

void write_audit_csv(const std::vector<AuditRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_audit_csv: cannot open '" + path + "'");
    out << "method,sample,time_ms,setup_ms,iter,kappa,density,converged\n";
    for (const auto& r : rows)
        out << r.method << "," << r.sample_id << "," << format_value(r.time_ms) << ","
            << format_value(r.setup_ms) << "," << r.iterations << ","
            << format_value(r.kappa) << "," << format_value(r.density) << ","
            << (r.converged ? 1 : 0) << "\n";
}

std::vector<AuditRow> read_audit_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("read_audit_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) ||
        line != "method,sample,time_ms,setup_ms,iter,kappa,density,converged")
        throw Error("read_audit_csv: '" + path + "' has an unexpected header");

    std::vector<AuditRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        AuditRow r;
        std::string token;
        int converged = 0;
        auto next = [&](const char* what) {
            if (!std::getline(fields, token, ','))
                throw Error("read_audit_csv: " + path + ":" + std::to_string(line_no) +
                            ": missing " + what);
            return token;
        };
        r.method = next("method");
        r.sample_id = std::stoi(next("sample"));
        r.time_ms = std::strtod(next("time_ms").c_str(), nullptr);
        r.setup_ms = std::strtod(next("setup_ms").c_str(), nullptr);
        r.iterations = std::stoi(next("iter"));
        r.kappa = std::strtod(next("kappa").c_str(), nullptr);
        r.density = std::strtod(next("density").c_str(), nullptr);
        converged = std::stoi(next("converged"));
        r.converged = converged != 0;
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace precondnet
