#include <doctest.h>

#include <cmath>

#include "precondnet/dense.hpp"
#include "precondnet/error.hpp"
#include "precondnet/spectral.hpp"
#include "test_support.hpp"

using namespace precondnet;
using namespace precondnet::testing;

TEST_CASE("dense_cholesky examples") {
    SUBCASE("identity") {
        const auto L = dense_cholesky(DenseMatrix::identity(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(L.at(i, j) == (i == j ? 1.0 : 0.0));
    }
    SUBCASE("hand factorization") {
        DenseMatrix A(2, 2);
        A.at(0, 0) = 4.0; A.at(0, 1) = 2.0;
        A.at(1, 0) = 2.0; A.at(1, 1) = 2.0;
        const auto L = dense_cholesky(A);
        CHECK(L.at(0, 0) == 2.0);
        CHECK(L.at(0, 1) == 0.0);
        CHECK(L.at(1, 0) == 1.0);
        CHECK(L.at(1, 1) == 1.0);
    }
    SUBCASE("indefinite rejected") {
        DenseMatrix A(2, 2);
        A.at(0, 0) = 1.0; A.at(0, 1) = 2.0;
        A.at(1, 0) = 2.0; A.at(1, 1) = 1.0; // eigenvalues 3, -1
        CHECK_THROWS_WITH_AS((void)dense_cholesky(A),
                             doctest::Contains("not positive definite"), Error);
    }
}

TEST_CASE("dense_cholesky reconstructs random SPD matrices") {
    Rng rng(3);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2 + rng.uniform_int(0, 62);
        const auto A = random_spd(n, rng);
        const auto Ad = to_dense(A);
        const auto L = dense_cholesky(Ad);
        const auto R = matmul(L, dense_transpose(L));
        double scale = 0.0;
        for (double v : Ad.values) scale = std::max(scale, std::abs(v));
        double err = 0.0;
        for (std::size_t i = 0; i < R.values.size(); ++i)
            err = std::max(err, std::abs(R.values[i] - Ad.values[i]));
        CHECK(err < 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("cholesky_solve matches direct inversion on small systems") {
    Rng rng(5);
    const auto A = random_spd(12, rng);
    const auto L = dense_cholesky(to_dense(A));
    const auto x = random_vector(12, rng);
    const auto b = spmv(A, x);
    const auto back = cholesky_solve(L, b);
    CHECK(max_abs_diff(back, x) < 1e-9);
}

TEST_CASE("condition_number examples") {
    SUBCASE("identity has kappa 1") {
        const auto info = condition_number(DenseMatrix::identity(3));
        CHECK(info.kappa() == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("diagonal matrix") {
        DenseMatrix D(3, 3);
        D.at(0, 0) = 1.0; D.at(1, 1) = 2.0; D.at(2, 2) = 4.0;
        const auto info = condition_number(D);
        CHECK(info.kappa() == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(info.sigma_max == doctest::Approx(4.0));
        CHECK(info.sigma_min == doctest::Approx(1.0));
        // extreme right/left vectors align with e3 (sign-free)
        CHECK(std::abs(info.u_max[2]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(info.v_max[2]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(info.u_min[0]) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("3x3-grid Poisson has kappa 3 + 2*sqrt(2)") {
        const auto A = grid_poisson(3, 3);
        const auto info = condition_number(to_dense(A));
        const double expected = 3.0 + 2.0 * std::sqrt(2.0);
        CHECK(std::abs(info.kappa() - expected) / expected < 1e-9);
    }
    SUBCASE("numerically singular input") {
        DenseMatrix Z(2, 2); // all zeros
        CHECK_THROWS_WITH_AS((void)condition_number(Z),
                             doctest::Contains("numerically singular"), Error);
    }
}

TEST_CASE("condition number is invariant under positive scaling") {
    Rng rng(17);
    for (double c : {0.25, 3.0, 1e-3, 512.0}) {
        const auto A = random_spd(10, rng);
        auto B = to_dense(A);
        const double kappa0 = condition_number(B).kappa();
        for (auto& v : B.values) v *= c;
        const double kappa1 = condition_number(B).kappa();
        CHECK(std::abs(kappa1 - kappa0) / kappa0 < 1e-12);
    }
}

TEST_CASE("singular vectors are unit norm and consistent") {
    Rng rng(23);
    const auto A = random_spd(16, rng);
    const auto B = to_dense(A);
    const auto info = condition_number(B);
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    CHECK(norm(info.u_max) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(norm(info.v_max) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(norm(info.u_min) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(norm(info.v_min) == doctest::Approx(1.0).epsilon(1e-10));

    // B v = sigma u for both extreme pairs
    const auto Bv = matmul(B, [&] {
        DenseMatrix V(16, 1);
        for (int i = 0; i < 16; ++i) V.at(i, 0) = info.v_max[static_cast<std::size_t>(i)];
        return V;
    }());
    for (int i = 0; i < 16; ++i)
        CHECK(Bv.at(i, 0) ==
              doctest::Approx(info.sigma_max * info.u_max[static_cast<std::size_t>(i)])
                  .epsilon(1e-8));
}

TEST_CASE("dense workspace cap rejects oversized inputs") {
    // dense_cap defaults to 4096; anything above must be rejected
    DenseMatrix big(4097, 4097);
    CHECK_THROWS_WITH_AS((void)dense_cholesky(big), doctest::Contains("cap"), Error);
}
