#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stylo/changepoint.hpp"
#include "stylo/common.hpp"
#include "stylo/rng.hpp"
#include "oracles.hpp"

using namespace stylo;

namespace {

TimeSeries series(std::vector<double> v) {
    TimeSeries s;
    for (std::size_t i = 0; i < v.size(); ++i) s.bucket_labels.push_back("t" + std::to_string(100 + i));
    s.values = std::move(v);
    return s;
}

TimeSeries step10() { return series({0, 0, 0, 0, 0, 5, 5, 5, 5, 5}); }

double bitmask_optimum(const std::vector<double>& v, const PeltConfig& cfg) {
    return oracle::best_segmentation(v, cfg.penalty_coeff, cfg.min_size, cfg.jump);
}

TimeSeries random_series(Rng& rng, std::size_t n) {
    std::vector<double> v;
    double level = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.bernoulli(0.2)) level += rng.normal(0.0, 3.0);
        v.push_back(level + rng.normal(0.0, 0.5 + rng.uniform()));
    }
    return series(v);
}

} // namespace

TEST_CASE("gaussian segment cost") {
    const std::vector<double> v{0, 2, 7, 7, 7};
    CHECK(segment_cost(v, 0, 2) == doctest::Approx(2.0 * (std::log(2.0 * std::numbers::pi) + 1.0)).epsilon(1e-12));
    CHECK(std::abs(segment_cost(v, 0, 2) - 5.6758) < 1e-4);
    CHECK(segment_cost(v, 2, 5) == doctest::Approx(3.0 * (std::log(2.0 * std::numbers::pi * 1e-8) + 1.0)));
    CHECK(segment_cost({3, 1, 2}, 0, 3) == doctest::Approx(segment_cost({1, 2, 3}, 0, 3)).epsilon(1e-14));
    CHECK_THROWS_AS(segment_cost(v, 2, 2), InputError);
}

TEST_CASE("noiseless step is found at index 5") {
    PeltConfig cfg;
    cfg.min_size = 1;
    cfg.jump = 1;
    const auto r = pelt(step10(), cfg);
    CHECK(r.breakpoints == std::vector<std::size_t>{5});
    CHECK(r.penalty == doctest::Approx(4.2 * std::log(10.0)));
    CHECK(r.total_cost == doctest::Approx(bitmask_optimum(step10().values, cfg)).epsilon(1e-12));

    cfg.jump = 2;
    const auto even = pelt(step10(), cfg);
    // 5 is not a multiple of 2; the best admissible segmentation isolates the
    // jump bucket between cuts at 4 and 6.
    CHECK(even.breakpoints == std::vector<std::size_t>{4, 6});
    CHECK(even.total_cost == doctest::Approx(bitmask_optimum(step10().values, cfg)).epsilon(1e-12));
    CHECK(even.total_cost == doctest::Approx(brute_force_segmentation(step10(), cfg).total_cost).epsilon(1e-12));
}

TEST_CASE("constant series has no breaks") {
    for (std::size_t n : {2u, 5u, 10u, 40u}) {
        const auto r = pelt(series(std::vector<double>(n, 3.25)), PeltConfig{});
        CHECK(r.breakpoints.empty());
        REQUIRE(r.segments.size() == 1);
        CHECK(r.segments[0].length == n);
    }
}

TEST_CASE("short series are skipped with a warning") {
    PeltConfig cfg;
    cfg.min_size = 3;
    const auto r = pelt(series({1, 2, 3, 4, 5}), cfg);
    CHECK(r.breakpoints.empty());
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("pelt matches exhaustive search") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 2 + rng.index(15);
        const auto s = random_series(rng, n);
        PeltConfig cfg;
        cfg.jump = 1 + rng.index(3);
        cfg.min_size = 1 + rng.index(2);
        if (n < 2 * cfg.min_size) continue;
        const auto p = pelt(s, cfg);
        const auto b = brute_force_segmentation(s, cfg);
        CHECK(std::abs(p.total_cost - b.total_cost) < 1e-9);
        CHECK(std::abs(p.total_cost - bitmask_optimum(s.values, cfg)) < 1e-9);
        for (auto bp : p.breakpoints) CHECK(bp % cfg.jump == 0);
        for (const auto& seg : p.segments) CHECK(seg.length >= cfg.min_size);
    }
}

TEST_CASE("exhaustive search guards and degenerate sizes") {
    CHECK_THROWS_AS(brute_force_segmentation(series(std::vector<double>(25, 1.0)), PeltConfig{}), InputError);
    PeltConfig cfg;
    cfg.jump = 1;
    const auto two = series({0.0, 10.0});
    CHECK(brute_force_segmentation(two, cfg).total_cost == doctest::Approx(bitmask_optimum(two.values, cfg)));
    const auto s = series({1, 4, 2, 8});
    cfg.penalty_coeff = 1e6;
    CHECK(brute_force_segmentation(s, cfg).total_cost ==
          doctest::Approx(segment_cost(s.values, 0, 4)).epsilon(1e-12));
}

TEST_CASE("penalty monotonicity, shift invariance, min_size") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const auto s = random_series(rng, 20 + rng.index(40));
        PeltConfig cfg;
        std::size_t prev = SIZE_MAX;
        for (double c : {0.5, 1.0, 2.0, 4.2, 8.0, 20.0}) {
            cfg.penalty_coeff = c;
            const auto k = pelt(s, cfg).breakpoints.size();
            CHECK(k <= prev);
            prev = k;
        }

        cfg = PeltConfig{};
        auto shifted = s;
        for (auto& v : shifted.values) v += 1234.5;
        CHECK(pelt(s, cfg).breakpoints == pelt(shifted, cfg).breakpoints);

        cfg.min_size = 4;
        std::size_t total = 0;
        for (const auto& seg : pelt(s, cfg).segments) {
            CHECK(seg.length >= 4);
            total += seg.length;
        }
        CHECK(total == s.n());
    }
}

TEST_CASE("config validation") {
    PeltConfig cfg;
    cfg.jump = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = PeltConfig{};
    cfg.penalty_coeff = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
