#ifndef PRECONDNET_POISSON_HPP
#define PRECONDNET_POISSON_HPP

#include <cstdint>
#include <vector>

#include "precondnet/csr.hpp"

namespace precondnet {

/// Binary fluid/solid cell grid. Fluid cells are numbered row-major into
/// equation indices 0..n-1; fluid_index maps cells to equation numbers
/// (-1 for solid cells).
struct OccupancyGrid {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> cells;  // height*width, 1 = solid, 0 = fluid
    std::vector<int> fluid_index;     // height*width, -1 for solid cells
    int n_fluid = 0;

    bool solid(int r, int c) const {
        return cells[static_cast<std::size_t>(r) * width + c] != 0;
    }
    bool fluid(int r, int c) const { return !solid(r, c); }
    int index(int r, int c) const {
        return fluid_index[static_cast<std::size_t>(r) * width + c];
    }
};

/// Discrete Poisson problem assembled from an occupancy grid.
struct PoissonSample {
    OccupancyGrid grid;
    CsrMatrix A;            // 5-point Laplacian over fluid cells, SPD
    std::vector<double> b;  // right-hand side over fluid cells
};

/// Rebuild fluid_index / n_fluid from cells (row-major numbering).
void reindex(OccupancyGrid& grid);

/// Deterministically place obstacle_count random solid rectangles/ellipses
/// on an all-fluid grid. An obstacle that would remove the last fluid cell
/// is dropped. Throws on dimensions < 2.
OccupancyGrid generate_grid(int height, int width, int obstacle_count,
                            std::uint64_t seed);

/// 5-point stencil over fluid cells with homogeneous Dirichlet boundaries:
/// diagonal 4 everywhere, -1 for each fluid-fluid 4-neighbor pair; solid
/// neighbors and the domain boundary clamp p = 0, so the diagonal stays 4.
CsrMatrix assemble_poisson(const OccupancyGrid& grid);

/// I.i.d. standard normal right-hand side over fluid cells.
std::vector<double> generate_rhs(const OccupancyGrid& grid, std::uint64_t seed);

/// grid + assemble + rhs in one call (rhs seed derived from the given seed).
PoissonSample generate_sample(int height, int width, int obstacle_count,
                              std::uint64_t seed);

} // namespace precondnet

#endif
