#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "precondnet/checkpoint.hpp"
#include "precondnet/dense.hpp"
#include "precondnet/error.hpp"
#include "precondnet/spectral.hpp"
#include "precondnet/training.hpp"
#include "test_support.hpp"

using namespace precondnet;
using namespace precondnet::testing;

TEST_CASE("loss equals the reported condition number (same code path)") {
    Rng rng(1);
    const auto params = CnnParams::random_init(rng);
    const auto A = grid_poisson(4, 4);

    const double loss = kappa_loss(A, params);
    const auto f = spd_assemble(model_forward(params, A));
    const double kappa = condition_number(spmm(A, dense_minv(f))).kappa();
    CHECK(loss == kappa);
    CHECK(loss >= 1.0);
}

TEST_CASE("loss is invariant under positive scaling of A with M fixed") {
    Rng rng(2);
    const auto params = CnnParams::random_init(rng);
    const auto A = grid_poisson(4, 4);
    const auto f = spd_assemble(model_forward(params, A));
    const auto minv = dense_minv(f);

    const double base = condition_number(spmm(A, minv)).kappa();
    for (double c : {0.5, 2.0, 8.0}) {
        auto scaled = A;
        for (auto& v : scaled.values) v *= c;
        const double kappa = condition_number(spmm(scaled, minv)).kappa();
        CHECK(std::abs(kappa - base) / base < 1e-12);
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto params = CnnParams::random_init(rng);
        const auto A = grid_poisson(4, 4); // n = 16
        const double err = finite_diff_check(params, A, 1e-6);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("finite_diff_check edge behaviors") {
    SUBCASE("zero params: all gradients vanish identically") {
        const auto A = grid_poisson(3, 3);
        const double err = finite_diff_check(CnnParams::zeros(), A, 1e-6);
        CHECK(err < 1e-5);
        CHECK(err == 0.0);
    }
    SUBCASE("huge h degrades, small h reaches the roundoff floor") {
        Rng rng(4);
        const auto params = CnnParams::random_init(rng);
        const auto A = grid_poisson(3, 3);
        const double coarse = finite_diff_check(params, A, 1e-1);
        const double mid = finite_diff_check(params, A, 1e-4);
        const double fine = finite_diff_check(params, A, 1e-6);
        CHECK(fine <= mid + 1e-7);  // improves until the floor
        CHECK(coarse > fine);       // truncation dominates at h = 1e-1
    }
    SUBCASE("size cap") {
        const auto A = grid_poisson(6, 6); // n = 36 > 32
        CHECK_THROWS_AS((void)finite_diff_check(CnnParams::zeros(), A, 1e-6), Error);
    }
}

TEST_CASE("clamped diagonal entries receive exactly zero gradient") {
    Rng rng(5);
    const auto A = grid_poisson(3, 3);
    const auto params = CnnParams::random_init(rng);

    auto raw = model_forward(params, A);
    const auto f = spd_assemble(raw);
    int clamped_site = -1;
    for (int s = 0; s < raw.n_sites(); ++s) {
        const int r = raw.grid.rows[static_cast<std::size_t>(s)];
        const int c = raw.grid.cols[static_cast<std::size_t>(s)];
        if (r == c && raw.value(s, 0) < f.epsilon - 1e-5) {
            clamped_site = s;
            break;
        }
    }
    REQUIRE(clamped_site >= 0);

    // perturbing a clamped raw diagonal below the threshold leaves the
    // operator, and hence the loss, bitwise unchanged
    const auto base = spd_assemble(raw);
    const double base_kappa = condition_number(spmm(A, dense_minv(base))).kappa();
    raw.value(clamped_site, 0) += 1e-5; // still at or below epsilon
    const auto nudged = spd_assemble(raw);
    CHECK(nudged.D == base.D);
    CHECK(nudged.factor.values == base.factor.values);
    const double nudged_kappa = condition_number(spmm(A, dense_minv(nudged))).kappa();
    CHECK(nudged_kappa == base_kappa);

    // gradient check passes in the presence of clamping
    CHECK(finite_diff_check(params, A, 1e-6) < 1e-5);
}

TEST_CASE("adam_step") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        Rng rng(6);
        auto params = CnnParams::random_init(rng);
        const auto before = params;
        AdamState state;
        adam_step(state, params, CnnParams::zeros());
        CHECK(state.step == 1);
        for (int l = 0; l < kNumLayers; ++l)
            CHECK(params.kernels[static_cast<std::size_t>(l)].w ==
                  before.kernels[static_cast<std::size_t>(l)].w);
        CHECK(params.prelu == before.prelu);
    }
    SUBCASE("first step moves by about -lr * sign(g)") {
        auto params = CnnParams::zeros();
        auto grads = CnnParams::zeros();
        grads.kernels[0].w[0] = 250.0;
        grads.kernels[0].w[1] = -75.0;
        AdamState state;
        state.lr = 1e-3;
        adam_step(state, params, grads);
        CHECK(params.kernels[0].w[0] == doctest::Approx(-1e-3).epsilon(1e-6));
        CHECK(params.kernels[0].w[1] == doctest::Approx(1e-3).epsilon(1e-6));
    }
    SUBCASE("identical state and grads give identical outputs") {
        Rng rng(7);
        auto p1 = CnnParams::random_init(rng);
        auto p2 = p1;
        auto grads = CnnParams::zeros();
        grads.kernels[2].w[17] = 0.3;
        grads.prelu[1] = -0.2;
        AdamState s1, s2;
        adam_step(s1, p1, grads);
        adam_step(s2, p2, grads);
        for (int l = 0; l < kNumLayers; ++l)
            CHECK(p1.kernels[static_cast<std::size_t>(l)].w ==
                  p2.kernels[static_cast<std::size_t>(l)].w);
        CHECK(p1.prelu == p2.prelu);
        CHECK(s1.step == s2.step);
    }
    SUBCASE("non-finite gradient names the tensor") {
        auto params = CnnParams::zeros();
        auto grads = CnnParams::zeros();
        grads.kernels[3].w[5] = std::numeric_limits<double>::quiet_NaN();
        AdamState state;
        CHECK_THROWS_WITH_AS(adam_step(state, params, grads),
                             doctest::Contains("conv_3"), Error);
    }
}

TEST_CASE("training smoke run reduces the loss and is reproducible") {
    std::vector<PoissonSample> train_set, val_set;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        train_set.push_back(generate_sample(8, 8, 1, seed));
    for (std::uint64_t seed = 100; seed < 103; ++seed)
        val_set.push_back(generate_sample(8, 8, 1, seed));

    TrainConfig config;
    config.epochs = 50;
    config.lr = 2e-3;
    config.seed = 9;

    const auto run1 = train(train_set, val_set, config);
    CHECK(run1.history.train_loss.size() == 50);
    CHECK(run1.history.val_loss.size() == 50);
    CHECK(run1.history.train_loss.back() < run1.history.train_loss.front());

    // 5-epoch moving average decreases over the run
    const auto& tl = run1.history.train_loss;
    auto avg = [&](std::size_t at) {
        double s = 0.0;
        for (std::size_t k = at; k < at + 5; ++k) s += tl[k];
        return s / 5.0;
    };
    CHECK(avg(tl.size() - 5) < avg(0));

    const auto run2 = train(train_set, val_set, config);
    CHECK(run1.history.train_loss == run2.history.train_loss);
    CHECK(run1.history.val_loss == run2.history.val_loss);

    // checkpoint round trip preserves the validation loss
    const auto path = std::filesystem::temp_directory_path() / "precondnet_best.ckpt";
    save_checkpoint(run1.params, path.string());
    const auto reloaded = load_checkpoint(path.string());
    double before = 0.0, after = 0.0;
    for (const auto& s : val_set) {
        before += kappa_loss(s.A, run1.params);
        after += kappa_loss(s.A, reloaded);
    }
    CHECK(before == after);
    std::filesystem::remove(path);
}

TEST_CASE("train rejects an empty training set") {
    CHECK_THROWS_AS((void)train({}, {}, TrainConfig{}), Error);
}

TEST_CASE("history csv") {
    TrainHistory h;
    h.train_loss = {3.5, 2.5};
    h.val_loss = {4.0, 3.0};
    const auto path = std::filesystem::temp_directory_path() / "precondnet_hist.csv";
    write_history_csv(h, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,train_loss,val_loss");
    std::getline(in, line);
    CHECK(line == "0,3.5,4");
    std::filesystem::remove(path);
}
