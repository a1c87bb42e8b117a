#ifndef PRECONDNET_CNN_HPP
#define PRECONDNET_CNN_HPP

#include <array>
#include <span>
#include <vector>

#include "precondnet/csr.hpp"
#include "precondnet/feature_map.hpp"
#include "precondnet/rng.hpp"

namespace precondnet {

/// Fixed six-layer fully convolutional architecture: kernel sizes
/// [1,2,2,2,2,1], channel widths [2,8,16,32,16,8,1], PReLU between layers
/// (five slopes), no biases. 2x2 layers pad one row on top and one column
/// on the left so spatial dimensions are preserved for any input size.
inline constexpr std::array<int, 6> kKernelSizes{1, 2, 2, 2, 2, 1};
inline constexpr std::array<int, 7> kChannels{2, 8, 16, 32, 16, 8, 1};
inline constexpr int kNumLayers = 6;
inline constexpr int kNumPrelu = 5;
/// Cumulative receptive-field extent of the four 2x2 layers (a 5x5 window).
inline constexpr int kReceptiveExtent = 4;

/// One convolution kernel tensor, weights in [out][in][kr][kc] order.
struct ConvKernel {
    int out_ch = 0;
    int in_ch = 0;
    int ksize = 0;
    std::vector<double> w;

    double& at(int o, int i, int kr, int kc) {
        return w[static_cast<std::size_t>(((o * in_ch + i) * ksize + kr)) * ksize + kc];
    }
    double at(int o, int i, int kr, int kc) const {
        return w[static_cast<std::size_t>(((o * in_ch + i) * ksize + kr)) * ksize + kc];
    }

    static ConvKernel zeros(int layer);
};

/// All trainable tensors: six kernels plus one PReLU slope per activation.
/// Also used as the container for shape-congruent gradients and Adam moments.
struct CnnParams {
    std::array<ConvKernel, kNumLayers> kernels;
    std::array<double, kNumPrelu> prelu{};

    static CnnParams zeros();
    /// Kernels i.i.d. uniform in [-s, s] with s = 1/sqrt(fan_in); slopes 0.25.
    static CnnParams random_init(Rng& rng);

    std::size_t total_parameters() const;
    void fill(double v);
    /// this += scale * other (shape-congruent).
    void axpy(double scale, const CnnParams& other);
    bool all_finite() const;
};

using GradientSet = CnnParams;

/// Names used in checkpoints and error messages: conv_0..conv_5, prelu_0..4.
std::string tensor_name(int index);

/// tril/diag input encoding: channel 0 carries the strictly lower entries of
/// A at their positions, channel 1 the diagonal on diagonal positions; the
/// active set is the union of both supports. Throws on non-square input.
FeatureMap encode_input(const CsrMatrix& A);

/// Sparse-convolution semantics: the output is computed only at pixels whose
/// receptive field intersects the input's active set and is exactly zero
/// elsewhere. 2x2 kernels use top-left zero padding, 1x1 kernels none.
FeatureMap conv_forward(const ConvKernel& kernel, const FeatureMap& input);

/// Elementwise x if x > 0 else a*x, applied on active sites only.
FeatureMap prelu(double a, const FeatureMap& x);

/// Precomputed support structure for repeated forward/backward passes over
/// one matrix: per-layer active sets and gather tables for the 2x2 layers.
struct ForwardPlan {
    int n = 0;
    FeatureMap input;                       // encoded 2-channel map
    std::array<SiteGrid, 5> stages;         // stage s = support after s dilations
    std::array<std::vector<std::int32_t>, 4> gather; // 2x2 layers, 4 taps per site
};

ForwardPlan plan_forward(const CsrMatrix& A);

/// Intermediate activations of one forward pass, kept for backprop.
struct ForwardTrace {
    std::array<std::vector<double>, kNumLayers> pre;  // conv outputs
    std::array<std::vector<double>, kNumPrelu> post;  // PReLU outputs
    FeatureMap raw;                                   // single-channel output
};

/// Full model: encode -> (conv, prelu) x 5 -> conv. Accepts any n >= 2.
void model_forward(const CnnParams& params, const ForwardPlan& plan, ForwardTrace& trace);
FeatureMap model_forward(const CnnParams& params, const CsrMatrix& A);

/// Reverse-mode pass; grad_raw lives on the sites of plan.stages[4].
/// Gradients are accumulated into grads (callers zero it first).
void model_backward(const CnnParams& params, const ForwardPlan& plan,
                    const ForwardTrace& trace, std::span<const double> grad_raw,
                    GradientSet& grads);

} // namespace precondnet

#endif
