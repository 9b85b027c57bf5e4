#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "impact/dram.hpp"

namespace impact {

/// Locality-parameterized stand-in for one data-intensive co-runner. The
/// MPKI value is descriptive; row_reuse_prob is the calibrated knob
/// (higher MPKI maps to lower reuse).
struct WorkloadProfile {
    std::string name;
    double llc_mpki = 0.0;
    double row_reuse_prob = 0.5;
    std::int64_t accesses = 40000; // per core
    std::uint64_t seed = 1;

    void validate() const;
};

struct TraceStep {
    int bank;
    RowId row;
};

/// One core's access stream: with probability row_reuse_prob the access
/// repeats the previous (bank,row), otherwise both are drawn uniformly.
struct AccessTrace {
    std::vector<TraceStep> steps;
    Cycle think_cycles = 90; // core-side work between blocking accesses
};

AccessTrace gen_trace(const WorkloadProfile& profile, const DramConfig& cfg,
                      Cycle think_cycles);

/// Replays `traces` (one per core, interleaved by issue time, banks shared)
/// under the given policy; returns the makespan.
Cycle run_trace(const std::vector<AccessTrace>& traces, const DramConfig& cfg,
                RowPolicy policy);

struct ProfileOverhead {
    std::string name;
    double row_reuse_prob;
    Cycle baseline_cycles;
    Cycle crp_cycles;
    Cycle ctd_cycles;
    double crp_overhead_pct;
    double ctd_overhead_pct;
};

struct OverheadReport {
    std::vector<ProfileOverhead> profiles;
    double mean_crp_overhead_pct = 0.0;
    double mean_ctd_overhead_pct = 0.0;
};

/// Two instances of each profile share the banks (one per logical core);
/// overheads are CRP/CTD makespans against the open-row baseline.
OverheadReport overhead_report(const std::vector<WorkloadProfile>& profiles,
                               const DramConfig& cfg, Cycle think_cycles);

/// Default five-profile set with reuse probabilities ranked inversely to
/// the published MPKI values.
std::vector<WorkloadProfile> default_profiles();

} // namespace impact
