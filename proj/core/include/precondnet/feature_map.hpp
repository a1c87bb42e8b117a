#ifndef PRECONDNET_FEATURE_MAP_HPP
#define PRECONDNET_FEATURE_MAP_HPP

#include <cstdint>
#include <vector>

namespace precondnet {

/// Active-site structure of a sparse feature map: the set of pixels that may
/// carry nonzero values. Sites are kept sorted row-major; site_of_pixel is
/// the inverse map (-1 for inactive pixels).
struct SiteGrid {
    int height = 0;
    int width = 0;
    std::vector<int> rows, cols;        // per site, row-major sorted
    std::vector<std::int32_t> site_of_pixel; // height*width, -1 = inactive

    int n_sites() const { return static_cast<int>(rows.size()); }

    int site_at(int r, int c) const {
        if (r < 0 || r >= height || c < 0 || c >= width) return -1;
        return site_of_pixel[static_cast<std::size_t>(r) * width + c];
    }

    bool active(int r, int c) const { return site_at(r, c) >= 0; }

    /// Build from an optionally unsorted, possibly duplicated pixel list.
    static SiteGrid from_pixels(int height, int width,
                                std::vector<std::pair<int, int>> pixels);
};

/// Dilate the active set by the window {0..extent} x {0..extent} (the image
/// of one top-left padded 2x2 convolution is extent = 1; the composed
/// receptive field of four such layers is extent = 4). Clipped to bounds.
SiteGrid dilate(const SiteGrid& in, int extent);

/// True iff every active site of `inner` is active in `outer` (same dims).
bool site_subset(const SiteGrid& inner, const SiteGrid& outer);

/// Sparse multi-channel feature map. Values are stored site-major
/// (values[site*channels + c]) and are exactly zero outside the active set.
struct FeatureMap {
    SiteGrid grid;
    int channels = 0;
    std::vector<double> values; // grid.n_sites() * channels

    int height() const { return grid.height; }
    int width() const { return grid.width; }
    int n_sites() const { return grid.n_sites(); }

    double at(int channel, int r, int c) const {
        const int s = grid.site_at(r, c);
        if (s < 0) return 0.0;
        return values[static_cast<std::size_t>(s) * channels + channel];
    }

    double& value(int site, int channel) {
        return values[static_cast<std::size_t>(site) * channels + channel];
    }
    double value(int site, int channel) const {
        return values[static_cast<std::size_t>(site) * channels + channel];
    }

    static FeatureMap zeros(SiteGrid grid, int channels);
};

} // namespace precondnet

#endif
