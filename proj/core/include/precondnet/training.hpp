#ifndef PRECONDNET_TRAINING_HPP
#define PRECONDNET_TRAINING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "precondnet/cnn.hpp"
#include "precondnet/poisson.hpp"
#include "precondnet/spd_assembly.hpp"

namespace precondnet {

struct LossGrad {
    double loss = 0.0;
    GradientSet grads;
    /// Relative gap between the extreme singular values and their neighbors;
    /// below kDegenerateGap the extreme-triplet gradient is unreliable and
    /// the training step is skipped.
    double sigma_gap_rel = 1.0;
};

inline constexpr double kDegenerateGap = 1e-10;

/// loss = kappa(A * M^{-1}) with M^{-1} = (T+D)(T+D)^T assembled from the
/// model output; reverse-mode gradient through the SVD extreme triplets, the
/// factor product, the diagonal clamp (zero where clamped) and all layers.
LossGrad kappa_loss_and_grad(const CsrMatrix& A, const CnnParams& params);
LossGrad kappa_loss_and_grad(const ForwardPlan& plan, const CsrMatrix& A,
                             const CnnParams& params);

/// Forward-only loss (validation, finite differences).
double kappa_loss(const CsrMatrix& A, const CnnParams& params);
double kappa_loss(const ForwardPlan& plan, const CsrMatrix& A, const CnnParams& params);

/// Central differences over every parameter entry against the analytic
/// gradient. Returns the worst discrepancy relative to the largest gradient
/// magnitude (0 when both gradients vanish). Restricted to n <= 32.
double finite_diff_check(const CnnParams& params, const CsrMatrix& A, double h);

/// Bias-corrected Adam.
struct AdamState {
    long long step = 0;
    CnnParams m = CnnParams::zeros();
    CnnParams v = CnnParams::zeros();
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One update in place; throws naming the tensor on non-finite gradients.
void adam_step(AdamState& state, CnnParams& params, const GradientSet& grads);

struct TrainConfig {
    int epochs = 64;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    int batch = 1;                // batches group samples of equal n
    std::string checkpoint_dir;   // empty: no checkpoint files
};

struct TrainHistory {
    std::vector<double> train_loss; // per-epoch mean
    std::vector<double> val_loss;   // per-epoch mean (NaN when no val set)
    int skipped_steps = 0;          // near-degenerate extreme singular values
};

struct TrainResult {
    CnnParams params; // best-validation parameters (final when no val set)
    TrainHistory history;
};

/// Full-pass training with per-batch averaged gradients. Deterministic for a
/// fixed seed/config (single-threaded). Any sample failing the loss
/// evaluation aborts with its sample id.
TrainResult train(const std::vector<PoissonSample>& train_set,
                  const std::vector<PoissonSample>& val_set, const TrainConfig& config);

/// History CSV with header "epoch,train_loss,val_loss".
void write_history_csv(const TrainHistory& history, const std::string& path);

} // namespace precondnet

#endif
