#include "precondnet/spd_assembly.hpp"

#include <algorithm>

#include "precondnet/error.hpp"
#include "precondnet/spectral.hpp"

namespace precondnet {

std::vector<double> SpdFactors::apply(std::span<const double> v) const {
    const auto y = spmv_transpose(factor, v);
    return spmv(factor, y);
}

SpdFactors spd_assemble(const SiteGrid& support, std::span<const double> values,
                        double epsilon) {
    if (support.height != support.width)
        throw Error("spd_assemble: raw map must be square");
    if (static_cast<int>(values.size()) != support.n_sites())
        throw Error("spd_assemble: one value per site required");

    const int n = support.height;
    SpdFactors f;
    f.epsilon = epsilon;
    f.D.assign(static_cast<std::size_t>(n), epsilon);

    std::vector<CooEntry> lower;
    for (int s = 0; s < support.n_sites(); ++s) {
        const int r = support.rows[static_cast<std::size_t>(s)];
        const int c = support.cols[static_cast<std::size_t>(s)];
        const double v = values[static_cast<std::size_t>(s)];
        if (r > c) {
            lower.push_back({r, c, v});
        } else if (r == c) {
            f.D[static_cast<std::size_t>(r)] = std::max(v, epsilon);
        }
        // r < c: strictly upper part of the raw output is discarded
    }
    f.T = csr_from_coo(lower, n, n);

    std::vector<CooEntry> fac = to_coo(f.T);
    for (int i = 0; i < n; ++i) fac.push_back({i, i, f.D[static_cast<std::size_t>(i)]});
    f.factor = csr_from_coo(fac, n, n);
    return f;
}

SpdFactors spd_assemble(const FeatureMap& raw, double epsilon) {
    if (raw.channels != 1) throw Error("spd_assemble: raw map must be single-channel");
    return spd_assemble(raw.grid, raw.values, epsilon);
}

DenseMatrix dense_minv(const SpdFactors& factors) {
    const int n = factors.size();
    DenseMatrix M(n, n);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        const auto col = factors.apply(e);
        e[static_cast<std::size_t>(j)] = 0.0;
        for (int i = 0; i < n; ++i) M.at(i, j) = col[static_cast<std::size_t>(i)];
    }
    return M;
}

double min_eigenvalue(const SpdFactors& factors) {
    const auto info = condition_number(to_dense(factors.factor));
    return info.sigma_min * info.sigma_min;
}

std::unique_ptr<Preconditioner> learned_precond(SpdFactors factors) {
    return std::make_unique<LearnedPreconditioner>(std::move(factors));
}

} // namespace precondnet
