#include "precondnet/feature_map.hpp"

#include <algorithm>

namespace precondnet {

SiteGrid SiteGrid::from_pixels(int height, int width,
                               std::vector<std::pair<int, int>> pixels) {
    std::sort(pixels.begin(), pixels.end());
    pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());

    SiteGrid g;
    g.height = height;
    g.width = width;
    g.site_of_pixel.assign(static_cast<std::size_t>(height) * width, -1);
    g.rows.reserve(pixels.size());
    g.cols.reserve(pixels.size());
    for (const auto& [r, c] : pixels) {
        g.site_of_pixel[static_cast<std::size_t>(r) * width + c] =
            static_cast<std::int32_t>(g.rows.size());
        g.rows.push_back(r);
        g.cols.push_back(c);
    }
    return g;
}

SiteGrid dilate(const SiteGrid& in, int extent) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(in.height) * in.width, 0);
    for (int s = 0; s < in.n_sites(); ++s) {
        const int r = in.rows[static_cast<std::size_t>(s)];
        const int c = in.cols[static_cast<std::size_t>(s)];
        const int r_end = std::min(in.height - 1, r + extent);
        const int c_end = std::min(in.width - 1, c + extent);
        for (int rr = r; rr <= r_end; ++rr)
            for (int cc = c; cc <= c_end; ++cc)
                mask[static_cast<std::size_t>(rr) * in.width + cc] = 1;
    }
    std::vector<std::pair<int, int>> pixels;
    for (int r = 0; r < in.height; ++r)
        for (int c = 0; c < in.width; ++c)
            if (mask[static_cast<std::size_t>(r) * in.width + c])
                pixels.emplace_back(r, c);
    return SiteGrid::from_pixels(in.height, in.width, std::move(pixels));
}

bool site_subset(const SiteGrid& inner, const SiteGrid& outer) {
    if (inner.height != outer.height || inner.width != outer.width) return false;
    for (int s = 0; s < inner.n_sites(); ++s)
        if (!outer.active(inner.rows[static_cast<std::size_t>(s)],
                          inner.cols[static_cast<std::size_t>(s)]))
            return false;
    return true;
}

FeatureMap FeatureMap::zeros(SiteGrid grid, int channels) {
    FeatureMap m;
    m.channels = channels;
    m.values.assign(static_cast<std::size_t>(grid.n_sites()) * channels, 0.0);
    m.grid = std::move(grid);
    return m;
}

} // namespace precondnet
