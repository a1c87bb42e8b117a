#include "precondnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "precondnet/checkpoint.hpp"
#include "precondnet/dataset_io.hpp"
#include "precondnet/error.hpp"
#include "precondnet/spectral.hpp"

namespace precondnet {

namespace {

SpectralInfo spectral_of_preconditioned(const CsrMatrix& A, const SpdFactors& factors) {
    const DenseMatrix minv = dense_minv(factors);
    const DenseMatrix B = spmm(A, minv);
    return condition_number(B); // throws "numerically singular" when degenerate
}

double loss_from_raw(const CsrMatrix& A, const ForwardPlan& plan,
                     std::span<const double> raw_values) {
    const SpdFactors factors = spd_assemble(plan.stages[4], raw_values, kDiagEpsilon);
    return spectral_of_preconditioned(A, factors).kappa();
}

/// Gradient of kappa w.r.t. the factor F = T + D, evaluated only at the
/// factor's support. With gB = (sigma_min u_max v_max^T - sigma_max
/// u_min v_min^T)/sigma_min^2, gM = A gB stays rank-2 and
/// gF = (gM + gM^T) F needs four transposed factor products.
struct FactorGrad {
    double a1, a2;
    std::vector<double> p1, p2;     // A u_max, A u_min
    std::vector<double> q1, q2;     // v_max, v_min
    std::vector<double> s1, s2;     // F^T q
    std::vector<double> t1, t2;     // F^T p

    FactorGrad(const CsrMatrix& A, const SpdFactors& factors, const SpectralInfo& spec)
        : a1(1.0 / spec.sigma_min),
          a2(-spec.sigma_max / (spec.sigma_min * spec.sigma_min)),
          p1(spmv(A, spec.u_max)),
          p2(spmv(A, spec.u_min)),
          q1(spec.v_max),
          q2(spec.v_min),
          s1(spmv_transpose(factors.factor, q1)),
          s2(spmv_transpose(factors.factor, q2)),
          t1(spmv_transpose(factors.factor, p1)),
          t2(spmv_transpose(factors.factor, p2)) {}

    double at(int i, int j) const {
        const auto ii = static_cast<std::size_t>(i);
        const auto jj = static_cast<std::size_t>(j);
        return a1 * (p1[ii] * s1[jj] + q1[ii] * t1[jj]) +
               a2 * (p2[ii] * s2[jj] + q2[ii] * t2[jj]);
    }
};

} // namespace

LossGrad kappa_loss_and_grad(const ForwardPlan& plan, const CsrMatrix& A,
                             const CnnParams& params) {
    ForwardTrace trace;
    model_forward(params, plan, trace);
    const SpdFactors factors = spd_assemble(plan.stages[4], trace.pre[5], kDiagEpsilon);
    const SpectralInfo spec = spectral_of_preconditioned(A, factors);

    LossGrad out;
    out.loss = spec.kappa();
    out.sigma_gap_rel = spec.gap_rel;
    out.grads = CnnParams::zeros();

    const FactorGrad gF(A, factors, spec);

    // Pull the factor gradient back onto the raw map: strictly lower sites
    // pass through, diagonal sites pass through only when unclamped, the
    // strictly upper triangle was discarded by the assembly.
    const SiteGrid& support = plan.stages[4];
    std::vector<double> grad_raw(static_cast<std::size_t>(support.n_sites()), 0.0);
    for (int s = 0; s < support.n_sites(); ++s) {
        const int r = support.rows[static_cast<std::size_t>(s)];
        const int c = support.cols[static_cast<std::size_t>(s)];
        if (r > c) {
            grad_raw[static_cast<std::size_t>(s)] = gF.at(r, c);
        } else if (r == c && trace.pre[5][static_cast<std::size_t>(s)] > factors.epsilon) {
            grad_raw[static_cast<std::size_t>(s)] = gF.at(r, c);
        }
    }

    model_backward(params, plan, trace, grad_raw, out.grads);
    return out;
}

LossGrad kappa_loss_and_grad(const CsrMatrix& A, const CnnParams& params) {
    return kappa_loss_and_grad(plan_forward(A), A, params);
}

double kappa_loss(const ForwardPlan& plan, const CsrMatrix& A, const CnnParams& params) {
    ForwardTrace trace;
    model_forward(params, plan, trace);
    return loss_from_raw(A, plan, trace.pre[5]);
}

double kappa_loss(const CsrMatrix& A, const CnnParams& params) {
    return kappa_loss(plan_forward(A), A, params);
}

namespace {

// ---- forward suffix: recompute only the layers a perturbation reaches ----

void conv_layer(const CnnParams& params, const ForwardPlan& plan, int l,
                std::span<const double> input, std::vector<double>& out);
void prelu_layer(double a, std::span<const double> z, std::vector<double>& out);

/// Forward pass where layers before the entry point are taken from `base`.
/// Entry is either conv layer `conv_start` (prelu_start = -1) or activation
/// `prelu_start`. Returns the raw single-channel values.
std::span<const double> suffix_forward(const CnnParams& params, const ForwardPlan& plan,
                                       const ForwardTrace& base, ForwardTrace& scratch,
                                       int conv_start, int prelu_start) {
    const int first_post = prelu_start >= 0 ? prelu_start : conv_start;
    const auto post_of = [&](int j) -> const std::vector<double>& {
        return j >= first_post ? scratch.post[static_cast<std::size_t>(j)]
                               : base.post[static_cast<std::size_t>(j)];
    };

    if (prelu_start >= 0) {
        prelu_layer(params.prelu[static_cast<std::size_t>(prelu_start)],
                    base.pre[static_cast<std::size_t>(prelu_start)],
                    scratch.post[static_cast<std::size_t>(prelu_start)]);
        conv_start = prelu_start + 1;
    }

    for (int l = conv_start; l < kNumLayers; ++l) {
        const std::span<const double> input =
            l == 0 ? std::span<const double>(plan.input.values)
                   : std::span<const double>(post_of(l - 1));
        conv_layer(params, plan, l, input, scratch.pre[static_cast<std::size_t>(l)]);
        if (l < kNumLayers - 1)
            prelu_layer(params.prelu[static_cast<std::size_t>(l)],
                        scratch.pre[static_cast<std::size_t>(l)],
                        scratch.post[static_cast<std::size_t>(l)]);
    }
    return scratch.pre[5];
}

void conv_layer(const CnnParams& params, const ForwardPlan& plan, int l,
                std::span<const double> input, std::vector<double>& out) {
    const ConvKernel& k = params.kernels[static_cast<std::size_t>(l)];
    if (k.ksize == 1) {
        const int n_sites = l == 0 ? plan.stages[0].n_sites() : plan.stages[4].n_sites();
        out.assign(static_cast<std::size_t>(n_sites) * k.out_ch, 0.0);
        for (int s = 0; s < n_sites; ++s) {
            const double* xin = &input[static_cast<std::size_t>(s) * k.in_ch];
            double* acc = &out[static_cast<std::size_t>(s) * k.out_ch];
            for (int i = 0; i < k.in_ch; ++i) {
                const double xi = xin[i];
                if (xi == 0.0) continue;
                for (int o = 0; o < k.out_ch; ++o)
                    acc[o] += k.w[static_cast<std::size_t>(o * k.in_ch + i)] * xi;
            }
        }
        return;
    }
    const auto& gather = plan.gather[static_cast<std::size_t>(l) - 1];
    const int n_out = plan.stages[static_cast<std::size_t>(l)].n_sites();
    out.assign(static_cast<std::size_t>(n_out) * k.out_ch, 0.0);
    for (int s = 0; s < n_out; ++s) {
        double* acc = &out[static_cast<std::size_t>(s) * k.out_ch];
        for (int p = 0; p < 4; ++p) {
            const std::int32_t t = gather[static_cast<std::size_t>(s) * 4 + p];
            if (t < 0) continue;
            const double* xin = &input[static_cast<std::size_t>(t) * k.in_ch];
            for (int i = 0; i < k.in_ch; ++i) {
                const double xi = xin[i];
                if (xi == 0.0) continue;
                const std::size_t base = static_cast<std::size_t>((0 * k.in_ch + i) * 4 + p);
                for (int o = 0; o < k.out_ch; ++o)
                    acc[o] += k.w[base + static_cast<std::size_t>(o * k.in_ch) * 4] * xi;
            }
        }
    }
}

void prelu_layer(double a, std::span<const double> z, std::vector<double>& out) {
    out.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? z[i] : a * z[i];
}

double max_abs(const CnnParams& g) {
    double m = 0.0;
    for (const auto& kernel : g.kernels)
        for (double w : kernel.w) m = std::max(m, std::abs(w));
    for (double a : g.prelu) m = std::max(m, std::abs(a));
    return m;
}

} // namespace

double finite_diff_check(const CnnParams& params, const CsrMatrix& A, double h) {
    if (A.n_rows > 32)
        throw Error("finite_diff_check: restricted to n <= 32, got " +
                    std::to_string(A.n_rows));
    if (h <= 0.0) throw Error("finite_diff_check: h must be positive");

    const ForwardPlan plan = plan_forward(A);
    const LossGrad analytic = kappa_loss_and_grad(plan, A, params);

    ForwardTrace base;
    model_forward(params, plan, base);
    ForwardTrace scratch;

    CnnParams work = params;
    GradientSet fd = CnnParams::zeros();

    const auto central = [&](double& slot, int conv_start, int prelu_start) {
        const double saved = slot;
        slot = saved + h;
        const double up = loss_from_raw(
            A, plan, suffix_forward(work, plan, base, scratch, conv_start, prelu_start));
        slot = saved - h;
        const double down = loss_from_raw(
            A, plan, suffix_forward(work, plan, base, scratch, conv_start, prelu_start));
        slot = saved;
        return (up - down) / (2.0 * h);
    };

    for (int l = 0; l < kNumLayers; ++l) {
        auto& w = work.kernels[static_cast<std::size_t>(l)].w;
        auto& g = fd.kernels[static_cast<std::size_t>(l)].w;
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = central(w[i], l, -1);
    }
    for (int j = 0; j < kNumPrelu; ++j)
        fd.prelu[static_cast<std::size_t>(j)] =
            central(work.prelu[static_cast<std::size_t>(j)], -1, j);

    const double scale = std::max(max_abs(analytic.grads), max_abs(fd));
    if (scale == 0.0) return 0.0;

    double worst = 0.0;
    for (int l = 0; l < kNumLayers; ++l) {
        const auto& ga = analytic.grads.kernels[static_cast<std::size_t>(l)].w;
        const auto& gf = fd.kernels[static_cast<std::size_t>(l)].w;
        for (std::size_t i = 0; i < ga.size(); ++i)
            worst = std::max(worst, std::abs(ga[i] - gf[i]));
    }
    for (int j = 0; j < kNumPrelu; ++j)
        worst = std::max(worst, std::abs(analytic.grads.prelu[static_cast<std::size_t>(j)] -
                                         fd.prelu[static_cast<std::size_t>(j)]));
    return worst / scale;
}

void adam_step(AdamState& state, CnnParams& params, const GradientSet& grads) {
    for (int l = 0; l < kNumLayers; ++l)
        for (double g : grads.kernels[static_cast<std::size_t>(l)].w)
            if (!std::isfinite(g))
                throw Error("adam_step: non-finite gradient in tensor " + tensor_name(l));
    for (int j = 0; j < kNumPrelu; ++j)
        if (!std::isfinite(grads.prelu[static_cast<std::size_t>(j)]))
            throw Error("adam_step: non-finite gradient in tensor " +
                        tensor_name(kNumLayers + j));

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    const auto update = [&](double& theta, double& m, double& v, double g) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        theta -= state.lr * (m / bc1) / (std::sqrt(v / bc2) + state.eps);
    };

    for (int l = 0; l < kNumLayers; ++l) {
        auto& w = params.kernels[static_cast<std::size_t>(l)].w;
        auto& m = state.m.kernels[static_cast<std::size_t>(l)].w;
        auto& v = state.v.kernels[static_cast<std::size_t>(l)].w;
        const auto& g = grads.kernels[static_cast<std::size_t>(l)].w;
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], m[i], v[i], g[i]);
    }
    for (int j = 0; j < kNumPrelu; ++j)
        update(params.prelu[static_cast<std::size_t>(j)],
               state.m.prelu[static_cast<std::size_t>(j)],
               state.v.prelu[static_cast<std::size_t>(j)],
               grads.prelu[static_cast<std::size_t>(j)]);
}

TrainResult train(const std::vector<PoissonSample>& train_set,
                  const std::vector<PoissonSample>& val_set, const TrainConfig& config) {
    if (train_set.empty()) throw Error("train: empty training set");
    if (config.epochs < 1) throw Error("train: epochs must be >= 1");
    if (config.batch < 1) throw Error("train: batch must be >= 1");

    Rng rng(config.seed);
    CnnParams params = CnnParams::random_init(rng);
    AdamState state;
    state.lr = config.lr;

    // batches group samples of equal n, in dataset order
    std::map<int, std::vector<int>> by_size;
    for (std::size_t i = 0; i < train_set.size(); ++i)
        by_size[train_set[i].A.n_rows].push_back(static_cast<int>(i));
    std::vector<std::vector<int>> batches;
    for (const auto& [n, idxs] : by_size)
        for (std::size_t at = 0; at < idxs.size(); at += static_cast<std::size_t>(config.batch))
            batches.emplace_back(
                idxs.begin() + static_cast<std::ptrdiff_t>(at),
                idxs.begin() + static_cast<std::ptrdiff_t>(
                                   std::min(at + static_cast<std::size_t>(config.batch),
                                            idxs.size())));

    std::vector<ForwardPlan> train_plans(train_set.size());
    for (std::size_t i = 0; i < train_set.size(); ++i)
        train_plans[i] = plan_forward(train_set[i].A);
    std::vector<ForwardPlan> val_plans(val_set.size());
    for (std::size_t i = 0; i < val_set.size(); ++i)
        val_plans[i] = plan_forward(val_set[i].A);

    const bool checkpoints = !config.checkpoint_dir.empty();
    if (checkpoints) std::filesystem::create_directories(config.checkpoint_dir);

    TrainResult result;
    result.params = params;
    double best_val = std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const auto& batch : batches) {
            GradientSet batch_grads = CnnParams::zeros();
            bool degenerate = false;
            for (int idx : batch) {
                LossGrad lg;
                try {
                    lg = kappa_loss_and_grad(train_plans[static_cast<std::size_t>(idx)],
                                             train_set[static_cast<std::size_t>(idx)].A,
                                             params);
                } catch (const Error& e) {
                    throw Error("train: sample " + std::to_string(idx) + ": " + e.what());
                }
                if (lg.loss < 1.0)
                    throw Error("train: sample " + std::to_string(idx) +
                                ": loss below 1, invariant violated");
                epoch_loss += lg.loss;
                if (lg.sigma_gap_rel < kDegenerateGap) degenerate = true;
                batch_grads.axpy(1.0 / static_cast<double>(batch.size()), lg.grads);
            }
            if (degenerate) {
                // near-repeated extreme singular values: triplet gradient is
                // unreliable, skip this update
                ++result.history.skipped_steps;
                continue;
            }
            adam_step(state, params, batch_grads);
        }
        result.history.train_loss.push_back(epoch_loss /
                                            static_cast<double>(train_set.size()));

        double val_mean = std::numeric_limits<double>::quiet_NaN();
        if (!val_set.empty()) {
            double sum = 0.0;
            for (std::size_t i = 0; i < val_set.size(); ++i)
                sum += kappa_loss(val_plans[i], val_set[i].A, params);
            val_mean = sum / static_cast<double>(val_set.size());
            if (val_mean < best_val) {
                best_val = val_mean;
                result.params = params;
                have_best = true;
                if (checkpoints)
                    save_checkpoint(params,
                                    (std::filesystem::path(config.checkpoint_dir) /
                                     "best.ckpt")
                                        .string());
            }
        }
        result.history.val_loss.push_back(val_mean);

        if (checkpoints)
            save_checkpoint(params, (std::filesystem::path(config.checkpoint_dir) /
                                     ("epoch_" + std::to_string(epoch) + ".ckpt"))
                                        .string());
    }

    if (!have_best) result.params = params; // no validation set: keep final
    return result;
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_history_csv: cannot open '" + path + "'");
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < history.train_loss.size(); ++e)
        out << e << "," << format_value(history.train_loss[e]) << ","
            << format_value(history.val_loss[e]) << "\n";
}

} // namespace precondnet
