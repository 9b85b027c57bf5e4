#include "impact/cache_model.hpp"

#include <cmath>

namespace impact {

const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::DramaClflush: return "drama-clflush";
        case AttackKind::DramaEviction: return "drama-eviction";
        case AttackKind::Streamline: return "streamline";
        case AttackKind::DmaEngine: return "dma-engine";
        case AttackKind::PnmOffChip: return "pnm-offchip";
        case AttackKind::DirectAccess: return "direct-access";
    }
    return "?";
}

Cycle CacheConfig::llc_lookup_cycles() const {
    auto it = llc_lookup_table.find(llc_size_mb);
    if (it == llc_lookup_table.end())
        throw InvalidConfig("no LLC lookup latency for size " + std::to_string(llc_size_mb) + " MB");
    return it->second;
}

void CacheConfig::validate() const {
    if (llc_ways < 1)
        throw InvalidConfig("llc_ways must be >= 1");
    if (mem_miss_cycles < 0)
        throw InvalidConfig("mem_miss_cycles must be >= 0");
    if (llc_lookup_table.empty())
        throw InvalidConfig("llc_lookup_table must have at least one entry");
    Cycle prev = -1;
    for (const auto& [size, cyc] : llc_lookup_table) {
        if (size < 1 || cyc < 1)
            throw InvalidConfig("llc_lookup_table entries must be positive");
        if (cyc <= prev)
            throw InvalidConfig("llc_lookup_table must be strictly increasing in size");
        prev = cyc;
    }
    llc_lookup_cycles();
}

double AnalyticParams::offchip_cache_prob(const CacheConfig& cfg) const {
    const int smallest = cfg.llc_lookup_table.begin()->first;
    const int largest = cfg.llc_lookup_table.rbegin()->first;
    if (cfg.llc_size_mb <= smallest || largest == smallest)
        return 0.0;
    const double span = std::log2(static_cast<double>(largest) / smallest);
    const double pos = std::log2(static_cast<double>(cfg.llc_size_mb) / smallest);
    return offchip_cache_prob_max * pos / span;
}

void AnalyticParams::validate() const {
    if (offchip_cache_prob_max < 0.0 || offchip_cache_prob_max >= 1.0)
        throw InvalidConfig("offchip_cache_prob_max must lie in [0, 1)");
    if (dram_bit_cost_cycles < 1 || offchip_base_cycles < 1 || streamline_base_cycles < 0)
        throw InvalidConfig("analytic cycle constants must be positive");
    if (dma_os_overhead_cycles < 0 || offchip_host_cycles < 0 || streamline_lookup_roundtrips < 1)
        throw InvalidConfig("analytic cycle constants must be positive");
}

Cycle eviction_latency(const CacheConfig& cfg) {
    cfg.validate();
    return static_cast<Cycle>(cfg.llc_ways) * (cfg.llc_lookup_cycles() + cfg.mem_miss_cycles);
}

Cycle bit_cost(AttackKind kind, const CacheConfig& cfg, const AnalyticParams& p) {
    switch (kind) {
        case AttackKind::DirectAccess:
            return p.dram_bit_cost_cycles;
        case AttackKind::DramaClflush:
            return p.dram_bit_cost_cycles + cfg.llc_lookup_cycles();
        case AttackKind::DramaEviction:
            return p.dram_bit_cost_cycles + eviction_latency(cfg);
        case AttackKind::Streamline:
            return p.streamline_base_cycles +
                   static_cast<Cycle>(p.streamline_lookup_roundtrips) * cfg.llc_lookup_cycles();
        case AttackKind::DmaEngine:
            return p.dram_bit_cost_cycles + p.dma_os_overhead_cycles;
        case AttackKind::PnmOffChip: {
            // Bits the predictor keeps on-chip transmit at the host-side rate.
            const double prob = p.offchip_cache_prob(cfg);
            const double cost = (1.0 - prob) * static_cast<double>(p.offchip_base_cycles) +
                                prob * static_cast<double>(p.offchip_host_cycles);
            return static_cast<Cycle>(std::llround(cost));
        }
    }
    throw InvalidConfig("unknown attack kind");
}

double throughput_mbps(Cycle bit_cost_cycles, double clock_ghz) {
    if (bit_cost_cycles <= 0)
        throw InvalidConfig("bit cost must be positive");
    return clock_ghz * 1000.0 / static_cast<double>(bit_cost_cycles);
}

std::vector<SweepRow> sweep(const std::vector<AttackKind>& kinds, const std::vector<int>& sizes,
                            const std::vector<int>& ways, const CacheConfig& base,
                            const AnalyticParams& p, double clock_ghz) {
    if (kinds.empty() || sizes.empty() || ways.empty())
        throw InvalidConfig("sweep requires non-empty kind/size/way lists");
    p.validate();
    std::vector<SweepRow> rows;
    rows.reserve(kinds.size() * sizes.size() * ways.size());
    for (AttackKind kind : kinds) {
        for (int size : sizes) {
            for (int w : ways) {
                CacheConfig cfg = base;
                cfg.llc_size_mb = size;
                cfg.llc_ways = w;
                const Cycle cost = bit_cost(kind, cfg, p);
                rows.push_back(SweepRow{kind, size, w, cost, throughput_mbps(cost, clock_ghz)});
            }
        }
    }
    return rows;
}

} // namespace impact
