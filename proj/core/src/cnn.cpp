#include "precondnet/cnn.hpp"

#include <cmath>
#include <string>

#include "precondnet/error.hpp"

namespace precondnet {

ConvKernel ConvKernel::zeros(int layer) {
    ConvKernel k;
    k.in_ch = kChannels[static_cast<std::size_t>(layer)];
    k.out_ch = kChannels[static_cast<std::size_t>(layer) + 1];
    k.ksize = kKernelSizes[static_cast<std::size_t>(layer)];
    k.w.assign(static_cast<std::size_t>(k.out_ch) * k.in_ch * k.ksize * k.ksize, 0.0);
    return k;
}

CnnParams CnnParams::zeros() {
    CnnParams p;
    for (int l = 0; l < kNumLayers; ++l) p.kernels[static_cast<std::size_t>(l)] = ConvKernel::zeros(l);
    p.prelu.fill(0.0);
    return p;
}

CnnParams CnnParams::random_init(Rng& rng) {
    CnnParams p = zeros();
    for (int l = 0; l < kNumLayers; ++l) {
        ConvKernel& kernel = p.kernels[static_cast<std::size_t>(l)];
        const double fan_in = static_cast<double>(kernel.in_ch) * kernel.ksize * kernel.ksize;
        const double s = 1.0 / std::sqrt(fan_in);
        // Scaled-down output head: a full-scale head makes the initial factor
        // catastrophically ill-conditioned (clamped epsilon diagonals under
        // O(1) lower entries) and the loss untrainable.
        const double scale = l == kNumLayers - 1 ? 1e-2 : 1.0;
        for (auto& w : kernel.w) w = rng.uniform(-scale * s, scale * s);
    }
    p.prelu.fill(0.25);
    return p;
}

std::size_t CnnParams::total_parameters() const {
    std::size_t count = prelu.size();
    for (const auto& kernel : kernels) count += kernel.w.size();
    return count;
}

void CnnParams::fill(double v) {
    for (auto& kernel : kernels)
        for (auto& w : kernel.w) w = v;
    prelu.fill(v);
}

void CnnParams::axpy(double scale, const CnnParams& other) {
    for (int l = 0; l < kNumLayers; ++l) {
        auto& w = kernels[static_cast<std::size_t>(l)].w;
        const auto& ow = other.kernels[static_cast<std::size_t>(l)].w;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * ow[i];
    }
    for (int a = 0; a < kNumPrelu; ++a)
        prelu[static_cast<std::size_t>(a)] += scale * other.prelu[static_cast<std::size_t>(a)];
}

bool CnnParams::all_finite() const {
    for (const auto& kernel : kernels)
        for (double w : kernel.w)
            if (!std::isfinite(w)) return false;
    for (double a : prelu)
        if (!std::isfinite(a)) return false;
    return true;
}

std::string tensor_name(int index) {
    if (index < kNumLayers) return "conv_" + std::to_string(index);
    return "prelu_" + std::to_string(index - kNumLayers);
}

FeatureMap encode_input(const CsrMatrix& A) {
    if (A.n_rows != A.n_cols)
        throw Error("encode_input: matrix must be square, got " +
                    std::to_string(A.n_rows) + "x" + std::to_string(A.n_cols));

    std::vector<std::pair<int, int>> pixels;
    for (int i = 0; i < A.n_rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (A.col_idx[k] <= i) pixels.emplace_back(i, A.col_idx[k]);

    FeatureMap m = FeatureMap::zeros(
        SiteGrid::from_pixels(A.n_rows, A.n_cols, std::move(pixels)), 2);
    for (int i = 0; i < A.n_rows; ++i) {
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int j = A.col_idx[k];
            if (j > i) continue;
            const int s = m.grid.site_at(i, j);
            m.value(s, j < i ? 0 : 1) = A.values[k];
        }
    }
    return m;
}

namespace {

/// Weights repacked tap-major for the inner loops: wp[(p*in + i)*out + o].
void repack(const ConvKernel& k, std::vector<double>& wp) {
    const int taps = k.ksize * k.ksize;
    wp.resize(static_cast<std::size_t>(taps) * k.in_ch * k.out_ch);
    for (int o = 0; o < k.out_ch; ++o)
        for (int i = 0; i < k.in_ch; ++i)
            for (int p = 0; p < taps; ++p)
                wp[static_cast<std::size_t>((p * k.in_ch + i)) * k.out_ch + o] =
                    k.w[static_cast<std::size_t>((o * k.in_ch + i)) * taps + p];
}

void conv1x1_values(const ConvKernel& k, std::span<const double> in, int n_sites,
                    std::vector<double>& out, std::vector<double>& wp) {
    repack(k, wp);
    out.assign(static_cast<std::size_t>(n_sites) * k.out_ch, 0.0);
    for (int s = 0; s < n_sites; ++s) {
        const double* xin = &in[static_cast<std::size_t>(s) * k.in_ch];
        double* acc = &out[static_cast<std::size_t>(s) * k.out_ch];
        for (int i = 0; i < k.in_ch; ++i) {
            const double xi = xin[i];
            if (xi == 0.0) continue;
            const double* wrow = &wp[static_cast<std::size_t>(i) * k.out_ch];
            for (int o = 0; o < k.out_ch; ++o) acc[o] += wrow[o] * xi;
        }
    }
}

void conv2x2_values(const ConvKernel& k, std::span<const double> in,
                    std::span<const std::int32_t> gather, int n_out_sites,
                    std::vector<double>& out, std::vector<double>& wp) {
    repack(k, wp);
    out.assign(static_cast<std::size_t>(n_out_sites) * k.out_ch, 0.0);
    for (int s = 0; s < n_out_sites; ++s) {
        double* acc = &out[static_cast<std::size_t>(s) * k.out_ch];
        for (int p = 0; p < 4; ++p) {
            const std::int32_t t = gather[static_cast<std::size_t>(s) * 4 + p];
            if (t < 0) continue;
            const double* xin = &in[static_cast<std::size_t>(t) * k.in_ch];
            const double* wtap = &wp[static_cast<std::size_t>(p) * k.in_ch * k.out_ch];
            for (int i = 0; i < k.in_ch; ++i) {
                const double xi = xin[i];
                if (xi == 0.0) continue;
                const double* wrow = &wtap[static_cast<std::size_t>(i) * k.out_ch];
                for (int o = 0; o < k.out_ch; ++o) acc[o] += wrow[o] * xi;
            }
        }
    }
}

/// Gather table stage_in -> stage_out for a top-left padded 2x2 window:
/// output pixel (i, j), tap p = (di, dj), reads input (i-1+di, j-1+dj).
std::vector<std::int32_t> make_gather(const SiteGrid& in, const SiteGrid& out) {
    std::vector<std::int32_t> gather(static_cast<std::size_t>(out.n_sites()) * 4, -1);
    for (int s = 0; s < out.n_sites(); ++s) {
        const int i = out.rows[static_cast<std::size_t>(s)];
        const int j = out.cols[static_cast<std::size_t>(s)];
        for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj)
                gather[static_cast<std::size_t>(s) * 4 + di * 2 + dj] =
                    static_cast<std::int32_t>(in.site_at(i - 1 + di, j - 1 + dj));
    }
    return gather;
}

void prelu_values(double a, std::span<const double> z, std::vector<double>& out) {
    out.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? z[i] : a * z[i];
}

/// Drop sites whose channel values are all exactly zero.
FeatureMap prune_zero_sites(const FeatureMap& m) {
    std::vector<std::pair<int, int>> pixels;
    for (int s = 0; s < m.n_sites(); ++s) {
        bool nonzero = false;
        for (int c = 0; c < m.channels; ++c)
            if (m.value(s, c) != 0.0) { nonzero = true; break; }
        if (nonzero)
            pixels.emplace_back(m.grid.rows[static_cast<std::size_t>(s)],
                                m.grid.cols[static_cast<std::size_t>(s)]);
    }
    FeatureMap out = FeatureMap::zeros(
        SiteGrid::from_pixels(m.height(), m.width(), std::move(pixels)), m.channels);
    for (int s = 0; s < out.n_sites(); ++s) {
        const int src = m.grid.site_at(out.grid.rows[static_cast<std::size_t>(s)],
                                       out.grid.cols[static_cast<std::size_t>(s)]);
        for (int c = 0; c < out.channels; ++c) out.value(s, c) = m.value(src, c);
    }
    return out;
}

} // namespace

FeatureMap conv_forward(const ConvKernel& kernel, const FeatureMap& input) {
    if (kernel.in_ch != input.channels)
        throw Error("conv_forward: kernel expects " + std::to_string(kernel.in_ch) +
                    " channels, input has " + std::to_string(input.channels));

    std::vector<double> wp, values;
    FeatureMap out;
    if (kernel.ksize == 1) {
        out = FeatureMap::zeros(input.grid, kernel.out_ch);
        conv1x1_values(kernel, input.values, input.n_sites(), values, wp);
    } else {
        SiteGrid grid = dilate(input.grid, 1);
        const auto gather = make_gather(input.grid, grid);
        const int n_out = grid.n_sites();
        out = FeatureMap::zeros(std::move(grid), kernel.out_ch);
        conv2x2_values(kernel, input.values, gather, n_out, values, wp);
    }
    out.values = std::move(values);
    return prune_zero_sites(out);
}

FeatureMap prelu(double a, const FeatureMap& x) {
    FeatureMap out = x;
    for (auto& v : out.values) v = v > 0.0 ? v : a * v;
    return out;
}

ForwardPlan plan_forward(const CsrMatrix& A) {
    if (A.n_rows < 2) throw Error("plan_forward: matrix size must be at least 2");
    ForwardPlan plan;
    plan.n = A.n_rows;
    plan.input = encode_input(A);
    plan.stages[0] = plan.input.grid;
    for (int s = 1; s < 5; ++s)
        plan.stages[static_cast<std::size_t>(s)] =
            dilate(plan.stages[static_cast<std::size_t>(s) - 1], 1);
    for (int g = 0; g < 4; ++g)
        plan.gather[static_cast<std::size_t>(g)] =
            make_gather(plan.stages[static_cast<std::size_t>(g)],
                        plan.stages[static_cast<std::size_t>(g) + 1]);
    return plan;
}

void model_forward(const CnnParams& params, const ForwardPlan& plan, ForwardTrace& trace) {
    static thread_local std::vector<double> wp;

    // layer 0: 1x1 on the input support
    conv1x1_values(params.kernels[0], plan.input.values, plan.stages[0].n_sites(),
                   trace.pre[0], wp);
    prelu_values(params.prelu[0], trace.pre[0], trace.post[0]);

    // layers 1..4: 2x2, each dilating the support once
    for (int l = 1; l <= 4; ++l) {
        conv2x2_values(params.kernels[static_cast<std::size_t>(l)],
                       trace.post[static_cast<std::size_t>(l) - 1],
                       plan.gather[static_cast<std::size_t>(l) - 1],
                       plan.stages[static_cast<std::size_t>(l)].n_sites(),
                       trace.pre[static_cast<std::size_t>(l)], wp);
        prelu_values(params.prelu[static_cast<std::size_t>(l)],
                     trace.pre[static_cast<std::size_t>(l)],
                     trace.post[static_cast<std::size_t>(l)]);
    }

    // layer 5: 1x1 down to a single channel
    conv1x1_values(params.kernels[5], trace.post[4], plan.stages[4].n_sites(),
                   trace.pre[5], wp);

    trace.raw.grid = plan.stages[4];
    trace.raw.channels = 1;
    trace.raw.values = trace.pre[5];
}

FeatureMap model_forward(const CnnParams& params, const CsrMatrix& A) {
    const ForwardPlan plan = plan_forward(A);
    ForwardTrace trace;
    model_forward(params, plan, trace);
    return trace.raw;
}

namespace {

void conv1x1_backward(const ConvKernel& k, std::span<const double> in,
                      std::span<const double> g_out, int n_sites,
                      std::vector<double>& g_in, ConvKernel& g_kernel) {
    g_in.assign(in.size(), 0.0);
    for (int s = 0; s < n_sites; ++s) {
        const double* xin = &in[static_cast<std::size_t>(s) * k.in_ch];
        const double* go = &g_out[static_cast<std::size_t>(s) * k.out_ch];
        double* gi = &g_in[static_cast<std::size_t>(s) * k.in_ch];
        for (int o = 0; o < k.out_ch; ++o) {
            const double g = go[o];
            if (g == 0.0) continue;
            for (int i = 0; i < k.in_ch; ++i) {
                g_kernel.w[static_cast<std::size_t>(o * k.in_ch + i)] += g * xin[i];
                gi[i] += g * k.w[static_cast<std::size_t>(o * k.in_ch + i)];
            }
        }
    }
}

void conv2x2_backward(const ConvKernel& k, std::span<const double> in,
                      std::span<const double> g_out,
                      std::span<const std::int32_t> gather, int n_out_sites,
                      std::vector<double>& g_in, ConvKernel& g_kernel) {
    g_in.assign(in.size(), 0.0);
    for (int s = 0; s < n_out_sites; ++s) {
        const double* go = &g_out[static_cast<std::size_t>(s) * k.out_ch];
        for (int p = 0; p < 4; ++p) {
            const std::int32_t t = gather[static_cast<std::size_t>(s) * 4 + p];
            if (t < 0) continue;
            const double* xin = &in[static_cast<std::size_t>(t) * k.in_ch];
            double* gi = &g_in[static_cast<std::size_t>(t) * k.in_ch];
            for (int o = 0; o < k.out_ch; ++o) {
                const double g = go[o];
                if (g == 0.0) continue;
                const std::size_t base = static_cast<std::size_t>((o * k.in_ch) * 4 + p);
                for (int i = 0; i < k.in_ch; ++i) {
                    g_kernel.w[base + static_cast<std::size_t>(i) * 4] += g * xin[i];
                    gi[i] += g * k.w[base + static_cast<std::size_t>(i) * 4];
                }
            }
        }
    }
}

void prelu_backward(double a, std::span<const double> z, std::span<const double> g_post,
                    std::vector<double>& g_pre, double& g_a) {
    g_pre.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] > 0.0) {
            g_pre[i] = g_post[i];
        } else {
            g_pre[i] = a * g_post[i];
            g_a += g_post[i] * z[i];
        }
    }
}

} // namespace

void model_backward(const CnnParams& params, const ForwardPlan& plan,
                    const ForwardTrace& trace, std::span<const double> grad_raw,
                    GradientSet& grads) {
    std::vector<double> g_post(grad_raw.begin(), grad_raw.end());
    std::vector<double> g_pre;

    // layer 5 (1x1): input is post[4]
    conv1x1_backward(params.kernels[5], trace.post[4], g_post,
                     plan.stages[4].n_sites(), g_pre, grads.kernels[5]);
    g_post = std::move(g_pre);

    for (int l = 4; l >= 1; --l) {
        std::vector<double> g_z;
        prelu_backward(params.prelu[static_cast<std::size_t>(l)],
                       trace.pre[static_cast<std::size_t>(l)], g_post, g_z,
                       grads.prelu[static_cast<std::size_t>(l)]);
        conv2x2_backward(params.kernels[static_cast<std::size_t>(l)],
                         trace.post[static_cast<std::size_t>(l) - 1], g_z,
                         plan.gather[static_cast<std::size_t>(l) - 1],
                         plan.stages[static_cast<std::size_t>(l)].n_sites(), g_pre,
                         grads.kernels[static_cast<std::size_t>(l)]);
        g_post = std::move(g_pre);
    }

    std::vector<double> g_z;
    prelu_backward(params.prelu[0], trace.pre[0], g_post, g_z, grads.prelu[0]);
    // layer 0 (1x1): only the kernel gradient is needed
    std::vector<double> unused;
    conv1x1_backward(params.kernels[0], plan.input.values, g_z,
                     plan.stages[0].n_sites(), unused, grads.kernels[0]);
}

} // namespace precondnet
