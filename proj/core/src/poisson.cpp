#include "precondnet/poisson.hpp"

#include <algorithm>
#include <string>

#include "precondnet/error.hpp"
#include "precondnet/rng.hpp"

namespace precondnet {

void reindex(OccupancyGrid& grid) {
    grid.fluid_index.assign(static_cast<std::size_t>(grid.height) * grid.width, -1);
    int next = 0;
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c)
            if (grid.fluid(r, c))
                grid.fluid_index[static_cast<std::size_t>(r) * grid.width + c] = next++;
    grid.n_fluid = next;
}

namespace {

int count_fluid(const std::vector<std::uint8_t>& cells) {
    return static_cast<int>(std::count(cells.begin(), cells.end(), std::uint8_t{0}));
}

} // namespace

OccupancyGrid generate_grid(int height, int width, int obstacle_count,
                            std::uint64_t seed) {
    if (height < 2 || width < 2)
        throw Error("generate_grid: dimensions must be at least 2x2, got " +
                    std::to_string(height) + "x" + std::to_string(width));

    OccupancyGrid grid;
    grid.height = height;
    grid.width = width;
    grid.cells.assign(static_cast<std::size_t>(height) * width, 0);

    Rng rng(seed);
    const int max_half = std::max(1, std::min(height, width) / 4);
    for (int k = 0; k < obstacle_count; ++k) {
        const bool ellipse = rng.uniform() < 0.5;
        const int cr = rng.uniform_int(0, height - 1);
        const int cc = rng.uniform_int(0, width - 1);
        const int hr = rng.uniform_int(1, max_half);
        const int hc = rng.uniform_int(1, max_half);

        std::vector<std::uint8_t> backup = grid.cells;
        for (int r = std::max(0, cr - hr); r <= std::min(height - 1, cr + hr); ++r) {
            for (int c = std::max(0, cc - hc); c <= std::min(width - 1, cc + hc); ++c) {
                if (ellipse) {
                    const double dr = static_cast<double>(r - cr) / hr;
                    const double dc = static_cast<double>(c - cc) / hc;
                    if (dr * dr + dc * dc > 1.0) continue;
                }
                grid.cells[static_cast<std::size_t>(r) * width + c] = 1;
            }
        }
        if (count_fluid(grid.cells) == 0) grid.cells = std::move(backup);
    }

    reindex(grid);
    return grid;
}

CsrMatrix assemble_poisson(const OccupancyGrid& grid) {
    if (grid.n_fluid < 1) throw Error("assemble_poisson: grid has no fluid cells");
    std::vector<CooEntry> entries;
    entries.reserve(static_cast<std::size_t>(grid.n_fluid) * 5);
    constexpr int dr[4] = {-1, 1, 0, 0};
    constexpr int dc[4] = {0, 0, -1, 1};
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const int i = grid.index(r, c);
            if (i < 0) continue;
            entries.push_back({i, i, 4.0});
            for (int d = 0; d < 4; ++d) {
                const int nr = r + dr[d];
                const int nc = c + dc[d];
                if (nr < 0 || nr >= grid.height || nc < 0 || nc >= grid.width) continue;
                const int j = grid.index(nr, nc);
                if (j >= 0) entries.push_back({i, j, -1.0});
                // solid neighbor / boundary: Dirichlet p = 0, diagonal stays 4
            }
        }
    }
    return csr_from_coo(entries, grid.n_fluid, grid.n_fluid);
}

std::vector<double> generate_rhs(const OccupancyGrid& grid, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> b(static_cast<std::size_t>(grid.n_fluid));
    for (auto& v : b) v = rng.normal();
    return b;
}

PoissonSample generate_sample(int height, int width, int obstacle_count,
                              std::uint64_t seed) {
    PoissonSample s;
    s.grid = generate_grid(height, width, obstacle_count, mix_seed(seed, 0));
    s.A = assemble_poisson(s.grid);
    s.b = generate_rhs(s.grid, mix_seed(seed, 1));
    return s;
}

} // namespace precondnet
