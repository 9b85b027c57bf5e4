#include "doctest.h"

#include <random>

#include "impact/dram.hpp"
#include "impact/sync.hpp"

using namespace impact;

namespace {

DramConfig table_defaults() {
    return DramConfig{}; // defaults reproduce the reference platform
}

MemoryAccess acc(int bank, RowId row, Cycle issue = 0, ProcessId pid = 0) {
    return MemoryAccess{pid, bank, row, issue, Origin::Host};
}

} // namespace

TEST_CASE("ns_to_cycles rounds up") {
    CHECK(ns_to_cycles(13.5, 2.6) == 36); // ceil(35.1)
    CHECK(ns_to_cycles(0.0, 2.6) == 0);
    CHECK(ns_to_cycles(100.0, 2.6) == 260); // exact product
    CHECK_THROWS_AS(ns_to_cycles(-1.0, 2.6), InvalidConfig);
    CHECK_THROWS_AS(ns_to_cycles(1.0, 0.0), InvalidConfig);
}

TEST_CASE("access outcome classes and latencies") {
    DramSystem dram(table_defaults());
    const DramConfig& cfg = dram.config();

    const AccessOutcome cold = dram.access(acc(0, 7));
    CHECK(cold.kind == AccessKind::Empty);
    CHECK(cold.latency_cycles == cfg.empty_latency());

    const AccessOutcome hit = dram.access(acc(0, 7, cold.completion_cycle));
    CHECK(hit.kind == AccessKind::Hit);
    CHECK(hit.latency_cycles == cfg.hit_latency());

    const AccessOutcome conflict = dram.access(acc(0, 9, hit.completion_cycle + 100));
    CHECK(conflict.kind == AccessKind::Conflict);
    // The conflict-hit gap is exactly the precharge+activate term.
    CHECK(conflict.latency_cycles - hit.latency_cycles ==
          ns_to_cycles(cfg.t_rp_ns, cfg.clock_ghz) + ns_to_cycles(cfg.t_rcd_ns, cfg.clock_ghz));
    CHECK(conflict.latency_cycles - hit.latency_cycles == 72);
}

TEST_CASE("conflict stalls until restoration completes") {
    DramConfig cfg = table_defaults();
    cfg.t_ras_ns = 30.0; // 78 cycles, well past the activate
    DramSystem dram(cfg);
    dram.set_command_log(true);

    const AccessOutcome first = dram.access(acc(0, 1));
    // Immediate conflict: precharge must wait for tRAS after the activate.
    const AccessOutcome second = dram.access(acc(0, 2, first.completion_cycle));
    CHECK(second.kind == AccessKind::Conflict);
    CHECK(second.latency_cycles > cfg.conflict_latency());
    CHECK(tras_respected(dram.command_log(), cfg));
}

TEST_CASE("expire_rows closes idle rows under the open policy") {
    DramSystem dram(table_defaults());
    dram.force_activate(0, 4, 0, 0);
    dram.bank_mut(0).last_use_cycle = 0;

    SUBCASE("past the timeout") {
        dram.expire_rows(261); // timeout = 260 cycles at 100 ns
        CHECK(!dram.bank(0).open_row.has_value());
    }
    SUBCASE("below the timeout") {
        dram.expire_rows(100);
        REQUIRE(dram.bank(0).open_row.has_value());
        CHECK(*dram.bank(0).open_row == 4);
    }
}

TEST_CASE("expire_rows is a no-op under closed-row policy") {
    DramConfig cfg = table_defaults();
    cfg.row_policy = RowPolicy::ClosedRow;
    DramSystem dram(cfg);
    dram.access(acc(0, 4));
    CHECK(!dram.bank(0).open_row.has_value()); // closed after the access
    dram.expire_rows(10'000);
    CHECK(!dram.bank(0).open_row.has_value());
}

TEST_CASE("map_address page interleaving") {
    const DramConfig cfg = table_defaults();

    const AddressParts origin = map_address(0, cfg);
    CHECK(origin.flat_bank == 0);
    CHECK(origin.row == 0);
    CHECK(origin.column == 0);

    const AddressParts second = map_address(cfg.row_size_bytes, cfg);
    CHECK(second.flat_bank == 1);
    CHECK(second.row == 0);

    const AddressParts wrap =
        map_address(static_cast<Addr>(cfg.row_size_bytes) * cfg.total_banks(), cfg);
    CHECK(wrap.flat_bank == 0);
    CHECK(wrap.row == 1);
}

TEST_CASE("map_address round trip is exact") {
    DramConfig cfg = table_defaults();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(mix_seed(seed, 1));
        cfg.n_banks = 1 << (rng() % 7);
        cfg.n_ranks = 1 + static_cast<int>(rng() % 4);
        cfg.n_channels = 1 + static_cast<int>(rng() % 2);
        for (int i = 0; i < 20; ++i) {
            const Addr a = static_cast<Addr>(rng() % (1ULL << 40));
            CHECK(unmap_address(map_address(a, cfg), cfg) == a);
        }
    }
}

TEST_CASE("latency ordering holds for random configurations") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(mix_seed(seed, 2));
        DramConfig cfg = table_defaults();
        cfg.t_rcd_ns = 5.0 + static_cast<double>(rng() % 200) / 10.0;
        cfg.t_rp_ns = 5.0 + static_cast<double>(rng() % 200) / 10.0;
        cfg.t_ras_ns = cfg.t_rcd_ns + static_cast<double>(rng() % 100) / 10.0;
        cfg.clock_ghz = 1.0 + static_cast<double>(rng() % 30) / 10.0;
        cfg.column_access_cycles = static_cast<int>(rng() % 80);
        cfg.controller_overhead_cycles = static_cast<int>(rng() % 20);

        REQUIRE(cfg.hit_latency() < cfg.empty_latency());
        REQUIRE(cfg.empty_latency() < cfg.conflict_latency());
        REQUIRE(cfg.conflict_latency() - cfg.hit_latency() ==
                ns_to_cycles(cfg.t_rp_ns, cfg.clock_ghz) +
                    ns_to_cycles(cfg.t_rcd_ns, cfg.clock_ghz));

        DramSystem dram(cfg);
        const AccessOutcome e = dram.access(acc(0, 1));
        const AccessOutcome h = dram.access(acc(0, 1, e.completion_cycle));
        const AccessOutcome c = dram.access(acc(0, 2, h.completion_cycle + cfg.tras_cycles()));
        REQUIRE(h.latency_cycles < e.latency_cycles);
        REQUIRE(e.latency_cycles < c.latency_cycles);
    }
}

TEST_CASE("constant-time policy yields a single latency class") {
    DramConfig cfg = table_defaults();
    cfg.row_policy = RowPolicy::ConstantTime;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(mix_seed(seed, 3));
        DramSystem dram(cfg);
        Cycle t = 0;
        Cycle expected = -1;
        for (int i = 0; i < 50; ++i) {
            const AccessOutcome out =
                dram.access(acc(static_cast<int>(rng() % 16), static_cast<RowId>(rng() % 4), t));
            if (expected < 0)
                expected = out.latency_cycles;
            REQUIRE(out.latency_cycles == expected);
            t = out.completion_cycle;
        }
    }
}

TEST_CASE("closed-row policy never hits or conflicts") {
    DramConfig cfg = table_defaults();
    cfg.row_policy = RowPolicy::ClosedRow;
    std::mt19937_64 rng(123);
    DramSystem dram(cfg);
    Cycle t = 0;
    for (int i = 0; i < 200; ++i) {
        const AccessOutcome out =
            dram.access(acc(static_cast<int>(rng() % 16), static_cast<RowId>(rng() % 3), t));
        REQUIRE(out.kind == AccessKind::Empty);
        t = out.completion_cycle;
    }
}

TEST_CASE("partition map blocks and isolates foreign banks") {
    DramConfig cfg = table_defaults();
    std::map<ProcessId, std::set<int>> parts;
    for (int b = 0; b < cfg.n_banks; ++b)
        (b < 8 ? parts[1] : parts[2]).insert(b);
    cfg.partition_map = parts;
    DramSystem dram(cfg);

    CHECK_NOTHROW(dram.access(acc(0, 1, 0, 1)));
    CHECK_THROWS_AS(dram.access(acc(9, 1, 0, 1)), PartitionViolation);

    // Process 1 activity leaves process 2's banks untouched.
    const BankState before = dram.bank(9);
    for (int i = 0; i < 10; ++i)
        dram.access(acc(i % 8, i, 100 * i, 1));
    CHECK(dram.bank(9).open_row == before.open_row);
    CHECK(dram.bank(9).busy_until_cycle == before.busy_until_cycle);
}

TEST_CASE("identical inputs give identical outcome sequences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        DramSystem a(table_defaults());
        DramSystem b(table_defaults());
        std::mt19937_64 ra(mix_seed(seed, 4)), rb(mix_seed(seed, 4));
        Cycle ta = 0, tb = 0;
        for (int i = 0; i < 100; ++i) {
            const AccessOutcome oa =
                a.access(acc(static_cast<int>(ra() % 16), static_cast<RowId>(ra() % 8), ta));
            const AccessOutcome ob =
                b.access(acc(static_cast<int>(rb() % 16), static_cast<RowId>(rb() % 8), tb));
            REQUIRE(oa.kind == ob.kind);
            REQUIRE(oa.latency_cycles == ob.latency_cycles);
            REQUIRE(oa.completion_cycle == ob.completion_cycle);
            ta = oa.completion_cycle;
            tb = ob.completion_cycle;
        }
    }
}

TEST_CASE("command log respects tRAS and busy_until is monotone") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(mix_seed(seed, 5));
        DramSystem dram(table_defaults());
        dram.set_command_log(true);
        std::vector<Cycle> busy(16, 0);
        Cycle t = 0;
        for (int i = 0; i < 100; ++i) {
            const int bank = static_cast<int>(rng() % 16);
            const AccessOutcome out = dram.access(acc(bank, static_cast<RowId>(rng() % 4), t));
            REQUIRE(dram.bank(bank).busy_until_cycle >= busy[static_cast<size_t>(bank)]);
            busy[static_cast<size_t>(bank)] = dram.bank(bank).busy_until_cycle;
            // Tight issue stream provokes restoration stalls.
            t = out.completion_cycle - static_cast<Cycle>(rng() % 40);
            if (t < 0)
                t = 0;
        }
        dram.expire_rows(t + 100'000);
        REQUIRE(tras_respected(dram.command_log(), dram.config()));
    }
}
