#include "doctest.h"

#include "impact/cache_model.hpp"

using namespace impact;

namespace {
constexpr double kClock = 2.6;
}

TEST_CASE("eviction latency is linear in ways") {
    CacheConfig cfg;
    cfg.llc_ways = 1;
    const Cycle single = eviction_latency(cfg);
    CHECK(single == cfg.llc_lookup_cycles() + cfg.mem_miss_cycles);

    cfg.llc_ways = 2;
    CHECK(eviction_latency(cfg) == 2 * single);

    CacheConfig narrow;
    narrow.llc_size_mb = 16;
    narrow.llc_ways = 16;
    CacheConfig wide = narrow;
    wide.llc_ways = 128;
    CHECK(eviction_latency(wide) == 8 * eviction_latency(narrow));
}

TEST_CASE("direct access matches the reference throughput on every size") {
    CacheConfig cfg;
    AnalyticParams p;
    for (int size : {8, 16, 32, 64, 128}) {
        cfg.llc_size_mb = size;
        const Cycle cost = bit_cost(AttackKind::DirectAccess, cfg, p);
        CHECK(cost == 231);
        const double mbps = throughput_mbps(cost, kClock);
        CHECK(mbps == doctest::Approx(11.27).epsilon(0.10));
    }
}

TEST_CASE("dma engine costs the direct path plus OS overhead") {
    CacheConfig cfg;
    AnalyticParams p;
    const Cycle cost = bit_cost(AttackKind::DmaEngine, cfg, p);
    CHECK(cost == p.dram_bit_cost_cycles + 262);
    CHECK(throughput_mbps(cost, kClock) == doctest::Approx(5.27).epsilon(0.10));
}

TEST_CASE("throughput_mbps unit conversions") {
    CHECK(throughput_mbps(202, 2.6) == doctest::Approx(12.87).epsilon(0.005));
    CHECK(throughput_mbps(1, 1.0) == doctest::Approx(1000.0));
    CHECK(throughput_mbps(260, 2.6) == doctest::Approx(10.0));
    CHECK_THROWS_AS(throughput_mbps(0, 1.0), InvalidConfig);
    // Dimensional consistency: doubling the clock doubles the rate.
    CHECK(throughput_mbps(500, 5.2) == doctest::Approx(2 * throughput_mbps(500, 2.6)));
}

TEST_CASE("eviction-based channel stays under the reference ceiling") {
    CacheConfig cfg; // smallest LLC, 16 ways: the model's best case
    AnalyticParams p;
    const double best = throughput_mbps(bit_cost(AttackKind::DramaEviction, cfg, p), kClock);
    CHECK(best <= 2.29 * 1.10);
}

TEST_CASE("streamline anchor at the smallest LLC") {
    CacheConfig cfg;
    AnalyticParams p;
    const double mbps = throughput_mbps(bit_cost(AttackKind::Streamline, cfg, p), kClock);
    CHECK(mbps == doctest::Approx(2.7).epsilon(0.05));
}

TEST_CASE("sweep trends: monotonicity, constancy, dominance") {
    const CacheConfig base;
    const AnalyticParams p;
    const std::vector<int> sizes = {8, 16, 32, 64, 128};
    const std::vector<int> ways = {2, 4, 8, 16, 32, 64, 128};

    const auto tput = [&](AttackKind kind, int size, int way) {
        CacheConfig cfg = base;
        cfg.llc_size_mb = size;
        cfg.llc_ways = way;
        return throughput_mbps(bit_cost(kind, cfg, p), kClock);
    };

    for (size_t i = 1; i < sizes.size(); ++i) {
        for (AttackKind kind : {AttackKind::DramaEviction, AttackKind::Streamline}) {
            CHECK(tput(kind, sizes[i], 16) < tput(kind, sizes[i - 1], 16));
        }
        CHECK(tput(AttackKind::DirectAccess, sizes[i], 16) ==
              tput(AttackKind::DirectAccess, sizes[i - 1], 16));
        CHECK(tput(AttackKind::DmaEngine, sizes[i], 16) ==
              tput(AttackKind::DmaEngine, sizes[i - 1], 16));
        CHECK(tput(AttackKind::PnmOffChip, sizes[i], 16) <
              tput(AttackKind::PnmOffChip, sizes[i - 1], 16));
    }
    for (size_t i = 1; i < ways.size(); ++i)
        CHECK(tput(AttackKind::DramaEviction, 16, ways[i]) <
              tput(AttackKind::DramaEviction, 16, ways[i - 1]));

    // Direct access dominates every cache-mediated attack at every point.
    for (int size : sizes) {
        for (AttackKind kind :
             {AttackKind::DramaClflush, AttackKind::DramaEviction, AttackKind::Streamline}) {
            CHECK(tput(AttackKind::DirectAccess, size, 16) > tput(kind, size, 16));
        }
    }
}

TEST_CASE("off-chip predictor anchors and shape") {
    const CacheConfig base;
    const AnalyticParams p;
    CacheConfig small = base;
    small.llc_size_mb = 8;
    CacheConfig large = base;
    large.llc_size_mb = 128;
    CHECK(p.offchip_cache_prob(small) == 0.0);
    CHECK(p.offchip_cache_prob(large) == doctest::Approx(p.offchip_cache_prob_max));

    const double top = throughput_mbps(bit_cost(AttackKind::PnmOffChip, small, p), kClock);
    const double bottom = throughput_mbps(bit_cost(AttackKind::PnmOffChip, large, p), kClock);
    CHECK(top == doctest::Approx(12.64).epsilon(0.15));
    CHECK(bottom == doctest::Approx(10.64).epsilon(0.15));
    CHECK(top > bottom);
}

TEST_CASE("sweep produces the full CSV-ready grid") {
    const std::vector<AttackKind> kinds = {AttackKind::DirectAccess, AttackKind::DramaEviction};
    const auto rows = sweep(kinds, {8, 16}, {16}, CacheConfig{}, AnalyticParams{}, kClock);
    CHECK(rows.size() == 4);
    CHECK_THROWS_AS(sweep({}, {8}, {16}, CacheConfig{}, AnalyticParams{}, kClock), InvalidConfig);
}

TEST_CASE("lookup table must be strictly increasing") {
    CacheConfig cfg;
    cfg.llc_lookup_table = {{8, 300}, {16, 300}};
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg.llc_lookup_table = {{8, 300}, {16, 200}};
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}
