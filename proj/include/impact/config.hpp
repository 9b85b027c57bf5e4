#pragma once

#include <string>
#include <vector>

#include "impact/cache_model.hpp"
#include "impact/channel.hpp"
#include "impact/dnarm.hpp"
#include "impact/dram.hpp"
#include "impact/mitigation.hpp"
#include "impact/pim.hpp"

namespace impact {

/// Side-channel experiment knobs beyond the shared dram/pim sections.
struct SideChannelConfig {
    int entry_size_bytes = 512;
    int rows_per_bank = 1;
    int rounds = 40;
    Cycle attacker_think_cycles = 200;
    double noise_rate_per_kilocycle = 0.010;
    Cycle victim_compute_cycles_per_seed = 1778;
    Cycle victim_align_cycles_per_read = 101;
    int accesses_per_read = 4;
    int read_len = 100;
    int seed_len = 21;
    std::vector<int> bank_sweep = {1024, 2048, 4096, 8192};
};

/// Full configuration tree; defaults reproduce the reference platform
/// (DDR4-2400, 16 banks, 2.6 GHz) plus the calibrated model constants.
struct HarnessConfig {
    DramConfig dram;
    CacheConfig cache;
    AnalyticParams analytic;
    PimConfig pim;
    ChannelConfig channel;
    SideChannelConfig sidechannel;
    std::vector<WorkloadProfile> profiles = default_profiles();
    Cycle profile_think_cycles = 90;

    void validate() const;
};

/// Parses the flat INI-style config (sections [dram], [cache], [pim],
/// [channel], [sidechannel], [profiles]); unknown sections or keys are hard
/// errors. An empty file yields the defaults.
HarnessConfig parse_config(const std::string& path);
HarnessConfig parse_config_text(const std::string& text);

} // namespace impact
