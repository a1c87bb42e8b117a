#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "precondnet/dataset_io.hpp"
#include "precondnet/dense.hpp"
#include "precondnet/error.hpp"
#include "precondnet/poisson.hpp"
#include "test_support.hpp"

using namespace precondnet;
using namespace precondnet::testing;

namespace {

std::string render(const OccupancyGrid& g) {
    std::string out;
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) out += g.solid(r, c) ? '#' : '.';
        if (r + 1 < g.height) out += '\n';
    }
    return out;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("generate_grid basics") {
    SUBCASE("no obstacles means all fluid") {
        const auto g = generate_grid(6, 9, 0, 123);
        CHECK(g.n_fluid == 6 * 9);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 9; ++c) CHECK(g.fluid(r, c));
    }
    SUBCASE("deterministic for fixed arguments") {
        const auto a = generate_grid(16, 16, 3, 7);
        const auto b = generate_grid(16, 16, 3, 7);
        CHECK(a.cells == b.cells);
        CHECK(a.fluid_index == b.fluid_index);
    }
    SUBCASE("fluid fraction in (0, 1] and golden trace for (16,16,3,seed 7)") {
        const auto g = generate_grid(16, 16, 3, 7);
        const double fraction = static_cast<double>(g.n_fluid) / (16.0 * 16.0);
        CHECK(fraction > 0.0);
        CHECK(fraction <= 1.0);
        // golden trace: frozen from the first run of the generator
        const char* expected =
            "......#.....####\n"
            ".....###....####\n"
            "......#.....####\n"
            "......#.....####\n"
            "............####\n"
            "............####\n"
            "................\n"
            "................\n"
            "................\n"
            "................\n"
            "................\n"
            "................\n"
            "................\n"
            "................\n"
            "................\n"
            "................";
        CHECK(render(g) == expected);
        CHECK(g.n_fluid == 226);
    }
    SUBCASE("impossible dimensions") {
        CHECK_THROWS_AS((void)generate_grid(1, 8, 0, 0), Error);
        CHECK_THROWS_AS((void)generate_grid(8, 1, 0, 0), Error);
    }
    SUBCASE("at least one fluid cell survives heavy obstacle load") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto g = generate_grid(4, 4, 50, seed);
            CHECK(g.n_fluid >= 1);
        }
    }
}

TEST_CASE("fluid_index is a row-major bijection") {
    const auto g = generate_grid(12, 10, 4, 99);
    int expected = 0;
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c)
            if (g.fluid(r, c)) CHECK(g.index(r, c) == expected++);
    CHECK(expected == g.n_fluid);
}

TEST_CASE("assemble_poisson examples") {
    SUBCASE("single cell") {
        OccupancyGrid g;
        g.height = 1;
        g.width = 1;
        g.cells = {0};
        reindex(g);
        const auto A = assemble_poisson(g);
        CHECK(A.n_rows == 1);
        CHECK(A.nnz() == 1);
        CHECK(A.at(0, 0) == 4.0);
    }
    SUBCASE("1x3 all fluid is tridiag(-1,4,-1)") {
        const auto A = grid_poisson(1, 3);
        const auto expected = tridiagonal(3, 4.0, -1.0);
        CHECK(A.row_ptr == expected.row_ptr);
        CHECK(A.col_idx == expected.col_idx);
        CHECK(A.values == expected.values);
    }
    SUBCASE("3x3 grid has analytic condition number") {
        // handled spectrally in test_dense_spectral; here check structure
        const auto A = grid_poisson(3, 3);
        CHECK(A.n_rows == 9);
        CHECK(A.at(4, 4) == 4.0);
        CHECK(A.at(4, 1) == -1.0);
        CHECK(A.at(4, 3) == -1.0);
        CHECK(A.at(4, 5) == -1.0);
        CHECK(A.at(4, 7) == -1.0);
        CHECK(A.at(0, 8) == 0.0);
    }
}

TEST_CASE("assembled matrices are symmetric SPD with dominant diagonal") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        const auto g = generate_grid(9, 9, 3, seed);
        const auto A = assemble_poisson(g);
        CHECK(is_symmetric(A));
        CHECK_NOTHROW((void)dense_cholesky(to_dense(A))); // SPD certificate

        // connected fluid components via flood fill over equation indices
        std::vector<int> component(static_cast<std::size_t>(A.n_rows), -1);
        int n_components = 0;
        for (int start = 0; start < A.n_rows; ++start) {
            if (component[static_cast<std::size_t>(start)] >= 0) continue;
            const int id = n_components++;
            std::vector<int> stack{start};
            while (!stack.empty()) {
                const int i = stack.back();
                stack.pop_back();
                if (component[static_cast<std::size_t>(i)] >= 0) continue;
                component[static_cast<std::size_t>(i)] = id;
                for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
                    if (component[static_cast<std::size_t>(A.col_idx[k])] < 0)
                        stack.push_back(A.col_idx[k]);
            }
        }

        std::vector<bool> strict_in_component(static_cast<std::size_t>(n_components), false);
        for (int i = 0; i < A.n_rows; ++i) {
            double diag = 0.0, off = 0.0;
            for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
                if (A.col_idx[k] == i)
                    diag = A.values[k];
                else
                    off += std::abs(A.values[k]);
            }
            CHECK(diag == 4.0);
            CHECK(off <= 4.0);
            if (off < 4.0) strict_in_component[static_cast<std::size_t>(
                component[static_cast<std::size_t>(i)])] = true;
        }
        // diagonal dominance certificate: strict row in every component
        for (int c = 0; c < n_components; ++c)
            CHECK(strict_in_component[static_cast<std::size_t>(c)]);
    }
}

TEST_CASE("generate_rhs is deterministic, sized, and zero-mean") {
    const auto g = generate_grid(100, 100, 0, 5);
    const auto b1 = generate_rhs(g, 77);
    const auto b2 = generate_rhs(g, 77);
    CHECK(b1 == b2);
    CHECK(b1.size() == static_cast<std::size_t>(g.n_fluid));

    double mean = 0.0;
    for (double v : b1) mean += v;
    mean /= static_cast<double>(b1.size()); // 10^4 draws
    CHECK(mean > -0.05);
    CHECK(mean < 0.05);
}

TEST_CASE("dataset save/load round trip") {
    std::vector<PoissonSample> samples;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
        samples.push_back(generate_sample(5, 7, 2, seed));

    const auto path = temp_file("precondnet_roundtrip.pmd");
    save_dataset(samples, path.string());
    const auto loaded = load_dataset(path.string());

    REQUIRE(loaded.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(loaded[i].grid.cells == samples[i].grid.cells);
        CHECK(loaded[i].A.row_ptr == samples[i].A.row_ptr);
        CHECK(loaded[i].A.col_idx == samples[i].A.col_idx);
        CHECK(loaded[i].A.values == samples[i].A.values); // bit-identical
        CHECK(loaded[i].b == samples[i].b);
    }
    std::filesystem::remove(path);
}

TEST_CASE("empty dataset round trips") {
    const auto path = temp_file("precondnet_empty.pmd");
    save_dataset({}, path.string());
    {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        CHECK(line == "PMD1 0");
    }
    CHECK(load_dataset(path.string()).empty());
    std::filesystem::remove(path);
}

TEST_CASE("truncated dataset names the missing section") {
    std::vector<PoissonSample> samples{generate_sample(4, 4, 1, 3)};
    std::ostringstream full;
    write_dataset(samples, full);
    const std::string text = full.str();

    // cut right before the rhs section
    const auto cut = text.find("rhs ");
    REQUIRE(cut != std::string::npos);
    std::istringstream truncated(text.substr(0, cut));
    CHECK_THROWS_WITH_AS((void)read_dataset(truncated, "mem"),
                         doctest::Contains("rhs"), Error);

    // malformed grid row
    std::istringstream bad("PMD1 1\nsample 0 2 2\n.. .x\nmatrix 4 4\n");
    CHECK_THROWS_WITH_AS((void)read_dataset(bad, "mem"), doctest::Contains(":3"), Error);
}
