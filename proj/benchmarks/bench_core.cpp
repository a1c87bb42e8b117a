#include <benchmark/benchmark.h>

#include "precondnet/amg.hpp"
#include "precondnet/cnn.hpp"
#include "precondnet/dense.hpp"
#include "precondnet/krylov.hpp"
#include "precondnet/poisson.hpp"
#include "precondnet/rng.hpp"
#include "precondnet/spd_assembly.hpp"
#include "precondnet/spectral.hpp"

using namespace precondnet;

namespace {

PoissonSample make_sample(int side) {
    return generate_sample(side, side, 2, 7);
}

void BM_spmv(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    std::vector<double> x(static_cast<std::size_t>(sample.A.n_rows), 1.0);
    for (auto _ : state) {
        auto y = spmv(sample.A, x);
        benchmark::DoNotOptimize(y);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_spmv)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_cg_vanilla(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto report = cg(sample.A, sample.b);
        benchmark::DoNotOptimize(report);
    }
}
BENCHMARK(BM_cg_vanilla)->Arg(16)->Arg(32);

void BM_pcg_ic0(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    const auto M = ic0(sample.A);
    for (auto _ : state) {
        auto report = pcg(sample.A, *M, sample.b);
        benchmark::DoNotOptimize(report);
    }
}
BENCHMARK(BM_pcg_ic0)->Arg(16)->Arg(32);

void BM_pcg_amg(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    const auto M = amg_setup(sample.A);
    for (auto _ : state) {
        auto report = pcg(sample.A, *M, sample.b);
        benchmark::DoNotOptimize(report);
    }
}
BENCHMARK(BM_pcg_amg)->Arg(16)->Arg(32);

void BM_amg_setup(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto M = amg_setup(sample.A);
        benchmark::DoNotOptimize(M);
    }
}
BENCHMARK(BM_amg_setup)->Arg(16)->Arg(32);

void BM_model_forward(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    Rng rng(3);
    const auto params = CnnParams::random_init(rng);
    const auto plan = plan_forward(sample.A);
    ForwardTrace trace;
    for (auto _ : state) {
        model_forward(params, plan, trace);
        benchmark::DoNotOptimize(trace);
    }
}
BENCHMARK(BM_model_forward)->Arg(16)->Arg(32);

void BM_learned_apply(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    Rng rng(3);
    const auto params = CnnParams::random_init(rng);
    const auto factors = spd_assemble(model_forward(params, sample.A));
    std::vector<double> v(static_cast<std::size_t>(sample.A.n_rows), 1.0);
    for (auto _ : state) {
        auto z = factors.apply(v);
        benchmark::DoNotOptimize(z);
    }
}
BENCHMARK(BM_learned_apply)->Arg(16)->Arg(32);

void BM_condition_number(benchmark::State& state) {
    const auto sample = make_sample(static_cast<int>(state.range(0)));
    const auto dense = to_dense(sample.A);
    for (auto _ : state) {
        auto info = condition_number(dense);
        benchmark::DoNotOptimize(info);
    }
}
BENCHMARK(BM_condition_number)->Arg(8)->Arg(16);

} // namespace

BENCHMARK_MAIN();
