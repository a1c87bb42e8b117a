// precondnet CLI: dataset generation, training, and benchmark evaluation of
// the five preconditioning methods (vanilla CG, Jacobi, IC(0), AMG, learned).

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "precondnet/checkpoint.hpp"
#include "precondnet/dataset_io.hpp"
#include "precondnet/error.hpp"
#include "precondnet/evaluate.hpp"
#include "precondnet/poisson.hpp"
#include "precondnet/rng.hpp"
#include "precondnet/training.hpp"

namespace fs = std::filesystem;
using namespace precondnet;

namespace {

int run_gen(int height, int width, int count, int obstacles, std::uint64_t seed,
            const std::string& out) {
    std::vector<PoissonSample> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        samples.push_back(generate_sample(height, width, obstacles,
                                          mix_seed(seed, static_cast<std::uint64_t>(i))));
    save_dataset(samples, out);
    std::cout << "wrote " << samples.size() << " samples to " << out << "\n";
    return 0;
}

int run_train(const std::string& data, const std::string& val, int epochs, double lr,
              std::uint64_t seed, const std::string& out_dir) {
    const auto train_set = load_dataset(data);
    const auto val_set = load_dataset(val);

    TrainConfig config;
    config.epochs = epochs;
    config.lr = lr;
    config.seed = seed;
    config.checkpoint_dir = out_dir;

    const TrainResult result = train(train_set, val_set, config);

    fs::create_directories(out_dir);
    write_history_csv(result.history, (fs::path(out_dir) / "history.csv").string());
    save_checkpoint(result.params, (fs::path(out_dir) / "best.ckpt").string());

    std::cout << "trained " << epochs << " epochs on " << train_set.size()
              << " samples (val " << val_set.size() << ")\n";
    if (!result.history.train_loss.empty()) {
        std::cout << "train loss " << result.history.train_loss.front() << " -> "
                  << result.history.train_loss.back() << "\n";
        std::cout << "val loss " << result.history.val_loss.front() << " -> "
                  << result.history.val_loss.back() << "\n";
    }
    if (result.history.skipped_steps > 0)
        std::cout << "skipped " << result.history.skipped_steps
                  << " steps (near-degenerate extreme singular values)\n";
    return 0;
}

int run_eval(const std::string& data, const std::string& methods_arg,
             const std::string& model_path, double tol, int max_iter,
             const std::string& summary_path, const std::string& residual_dir) {
    const auto samples = load_dataset(data);

    std::vector<PrecondKind> methods;
    std::stringstream list(methods_arg);
    std::string token;
    while (std::getline(list, token, ','))
        if (!token.empty()) methods.push_back(parse_method(token));
    if (methods.empty()) throw Error("eval: no methods requested");

    CnnParams model;
    bool have_model = false;
    for (PrecondKind m : methods) {
        if (m == PrecondKind::learned) {
            if (model_path.empty())
                throw Error("eval: method 'learned' requires --model CKPT");
            model = load_checkpoint(model_path);
            have_model = true;
        }
    }

    if (!residual_dir.empty()) fs::create_directories(residual_dir);

    EvalOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;

    std::vector<AuditRow> rows;
    for (PrecondKind method : methods) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto eval = evaluate_method(samples[i], static_cast<int>(i), method,
                                              have_model ? &model : nullptr, opts);
            rows.push_back(eval.row);
            if (!residual_dir.empty()) {
                const auto name = std::string("res_") + to_string(method) + "_" +
                                  std::to_string(i) + ".csv";
                write_residual_csv(eval.solve, (fs::path(residual_dir) / name).string());
            }
        }
    }

    const auto summaries = summarize(rows);
    write_summary_csv(summaries, summary_path);
    write_audit_csv(rows, summary_path + ".audit.csv");

    std::cout << "method,time_ms,iter,kappa,density\n";
    for (const auto& s : summaries)
        std::cout << s.method << "," << s.time_ms << "," << s.iterations << ","
                  << s.kappa << "," << s.density << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned sparse preconditioners for PCG on 2D Poisson problems"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a Poisson dataset");
    int height = 16, width = 16, count = 10, obstacles = 2;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "dataset.pmd";
    gen->add_option("--height", height, "grid height")->required();
    gen->add_option("--width", width, "grid width")->required();
    gen->add_option("--count", count, "number of samples")->required();
    gen->add_option("--obstacles", obstacles, "solid obstacles per grid");
    gen->add_option("--seed", gen_seed, "dataset seed");
    gen->add_option("--out", gen_out, "output file")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train the preconditioner model");
    std::string train_data, train_val, train_out = "run";
    int epochs = 64;
    double lr = 1e-3;
    std::uint64_t train_seed = 1;
    train_cmd->add_option("--data", train_data, "training dataset")->required();
    train_cmd->add_option("--val", train_val, "validation dataset")->required();
    train_cmd->add_option("--epochs", epochs, "epoch budget");
    train_cmd->add_option("--lr", lr, "Adam learning rate");
    train_cmd->add_option("--seed", train_seed, "initialization seed");
    train_cmd->add_option("--out", train_out, "output directory")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate preconditioning methods");
    std::string eval_data, methods = "vanilla,jacobi,ic0,amg", model_path;
    std::string summary_path = "summary.csv", residual_dir;
    double tol = 1e-6;
    int max_iter = 10000;
    eval_cmd->add_option("--data", eval_data, "evaluation dataset")->required();
    eval_cmd->add_option("--methods", methods, "comma list of methods");
    eval_cmd->add_option("--model", model_path, "checkpoint for the learned method");
    eval_cmd->add_option("--tol", tol, "relative residual tolerance");
    eval_cmd->add_option("--max-iter", max_iter, "iteration cap");
    eval_cmd->add_option("--summary", summary_path, "summary CSV path")->required();
    eval_cmd->add_option("--residual-dir", residual_dir, "per-sample residual CSVs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen(height, width, count, obstacles, gen_seed, gen_out);
        if (train_cmd->parsed())
            return run_train(train_data, train_val, epochs, lr, train_seed, train_out);
        if (eval_cmd->parsed())
            return run_eval(eval_data, methods, model_path, tol, max_iter, summary_path,
                            residual_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
