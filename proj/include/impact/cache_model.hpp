#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "impact/dram.hpp"

namespace impact {

enum class AttackKind {
    DramaClflush,
    DramaEviction,
    Streamline,
    DmaEngine,
    PnmOffChip,
    DirectAccess,
};

const char* to_string(AttackKind k);

/// LLC parameters for the closed-form baseline attack models. The lookup
/// table is an external input (one entry per LLC size), not a derived model.
struct CacheConfig {
    int llc_size_mb = 8;
    int llc_ways = 16;
    std::map<int, Cycle> llc_lookup_table = {
        {8, 280}, {16, 352}, {32, 448}, {64, 584}, {128, 761},
    };
    Cycle mem_miss_cycles = 231;

    Cycle llc_lookup_cycles() const; // table lookup for llc_size_mb
    void validate() const;           // throws InvalidConfig
};

/// Calibration constants for the per-attack bit-cost formulas.
struct AnalyticParams {
    Cycle dram_bit_cost_cycles = 231;   // direct row-buffer signalling cost
    Cycle dma_os_overhead_cycles = 262; // context switch + OS instructions
    Cycle offchip_base_cycles = 214;    // PEI offload path per bit
    Cycle offchip_host_cycles = 500;    // host-side rate for cached bits
    double offchip_cache_prob_max = 0.13;
    Cycle streamline_base_cycles = 123;
    int streamline_lookup_roundtrips = 3;

    /// Probability the off-chip predictor keeps a PEI on the CPU; monotone in
    /// the LLC size, 0 at the smallest table entry.
    double offchip_cache_prob(const CacheConfig& cfg) const;
    void validate() const;
};

/// Cycles to evict one cache line: fully serialized N-way model.
Cycle eviction_latency(const CacheConfig& cfg);

/// Cycles to transmit one bit through the row buffer for the given attack.
Cycle bit_cost(AttackKind kind, const CacheConfig& cfg, const AnalyticParams& p);

/// Megabits per second at one bit per channel use.
double throughput_mbps(Cycle bit_cost_cycles, double clock_ghz);

struct SweepRow {
    AttackKind kind;
    int llc_size_mb;
    int llc_ways;
    Cycle bit_cost_cycles;
    double throughput_mbps;
};

/// Cross product of kinds x sizes x ways, CSV-ready.
std::vector<SweepRow> sweep(const std::vector<AttackKind>& kinds, const std::vector<int>& sizes,
                            const std::vector<int>& ways, const CacheConfig& base,
                            const AnalyticParams& p, double clock_ghz);

} // namespace impact
