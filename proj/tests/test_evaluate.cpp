#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "precondnet/error.hpp"
#include "precondnet/evaluate.hpp"
#include "test_support.hpp"

using namespace precondnet;
using namespace precondnet::testing;

TEST_CASE("parse_method") {
    CHECK(parse_method("vanilla") == PrecondKind::identity);
    CHECK(parse_method("jacobi") == PrecondKind::jacobi);
    CHECK(parse_method("ic0") == PrecondKind::ic0);
    CHECK(parse_method("amg") == PrecondKind::amg);
    CHECK(parse_method("learned") == PrecondKind::learned);
    CHECK_THROWS_AS((void)parse_method("ilu"), Error);
}

TEST_CASE("evaluate_method vanilla equals plain cg") {
    const auto sample = generate_sample(6, 6, 1, 42);
    const auto eval = evaluate_method(sample, 0, PrecondKind::identity, nullptr);
    const auto direct = cg(sample.A, sample.b);
    CHECK(eval.solve.iterations == direct.iterations);
    CHECK(eval.solve.solution == direct.solution);
    CHECK(eval.row.method == "vanilla");
    CHECK(eval.row.converged);
}

TEST_CASE("jacobi and vanilla agree in iterations on Poisson samples") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto sample = generate_sample(8, 8, 2, seed);
        const auto vanilla = evaluate_method(sample, 0, PrecondKind::identity, nullptr);
        const auto jacobi = evaluate_method(sample, 0, PrecondKind::jacobi, nullptr);
        CHECK(vanilla.solve.iterations == jacobi.solve.iterations);
        CHECK(vanilla.row.kappa == doctest::Approx(jacobi.row.kappa).epsilon(1e-10));
    }
}

TEST_CASE("learned with an all-zero checkpoint behaves like vanilla") {
    const auto sample = generate_sample(6, 6, 0, 5);
    const auto zero = CnnParams::zeros();
    const auto learned = evaluate_method(sample, 0, PrecondKind::learned, &zero);
    const auto vanilla = evaluate_method(sample, 0, PrecondKind::identity, nullptr);
    // M^{-1} = eps^2 I: a positive multiple of the identity
    CHECK(learned.solve.iterations == vanilla.solve.iterations);
    CHECK(learned.row.kappa == doctest::Approx(vanilla.row.kappa).epsilon(1e-9));
}

TEST_CASE("learned without a model is an error") {
    const auto sample = generate_sample(4, 4, 0, 1);
    CHECK_THROWS_WITH_AS((void)evaluate_method(sample, 0, PrecondKind::learned, nullptr),
                         doctest::Contains("checkpoint"), Error);
}

TEST_CASE("summarize") {
    SUBCASE("single sample, single method") {
        AuditRow row{"vanilla", 0, 3.25, 0.5, 17, 99.5, 0.01, true};
        const auto summaries = summarize({row});
        REQUIRE(summaries.size() == 1);
        CHECK(summaries[0].method == "vanilla");
        CHECK(summaries[0].time_ms == 3.25);
        CHECK(summaries[0].iterations == 17.0);
        CHECK(summaries[0].kappa == 99.5);
        CHECK(summaries[0].density == 0.01);
        CHECK(summaries[0].sample_count == 1);
    }
    SUBCASE("fractional iteration means") {
        AuditRow a{"ic0", 0, 1.0, 0.0, 10, 5.0, 0.1, true};
        AuditRow b{"ic0", 1, 3.0, 0.0, 20, 7.0, 0.3, true};
        const auto summaries = summarize({a, b});
        CHECK(summaries[0].iterations == 15.0);
        CHECK(summaries[0].time_ms == 2.0);
        CHECK(summaries[0].kappa == 6.0);
    }
    SUBCASE("mismatched sample sets rejected") {
        AuditRow a{"vanilla", 0, 1.0, 0.0, 10, 5.0, 0.1, true};
        AuditRow b{"jacobi", 1, 1.0, 0.0, 10, 5.0, 0.1, true};
        CHECK_THROWS_WITH_AS((void)summarize({a, b}),
                             doctest::Contains("different sample sets"), Error);
    }
}

TEST_CASE("summary and audit round trip re-summarizes byte-identically") {
    namespace fs = std::filesystem;
    std::vector<AuditRow> rows;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto sample = generate_sample(6, 6, 1, seed);
        for (PrecondKind method :
             {PrecondKind::identity, PrecondKind::jacobi, PrecondKind::ic0}) {
            auto eval = evaluate_method(sample, static_cast<int>(seed), method, nullptr);
            rows.push_back(eval.row);
        }
    }
    // group rows per method as the CLI does
    std::stable_sort(rows.begin(), rows.end(),
                     [](const AuditRow& a, const AuditRow& b) { return a.method < b.method; });

    const auto audit_path = fs::temp_directory_path() / "precondnet_audit.csv";
    const auto sum1 = fs::temp_directory_path() / "precondnet_sum1.csv";
    const auto sum2 = fs::temp_directory_path() / "precondnet_sum2.csv";

    write_audit_csv(rows, audit_path.string());
    write_summary_csv(summarize(rows), sum1.string());

    const auto reloaded = read_audit_csv(audit_path.string());
    REQUIRE(reloaded.size() == rows.size());
    write_summary_csv(summarize(reloaded), sum2.string());

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(sum1) == slurp(sum2));
    for (const auto& p : {audit_path, sum1, sum2}) fs::remove(p);
}
