#include "impact/mitigation.hpp"

#include <algorithm>

#include "impact/sync.hpp"

namespace impact {

void WorkloadProfile::validate() const {
    if (row_reuse_prob < 0.0 || row_reuse_prob > 1.0)
        throw InvalidConfig("row_reuse_prob must lie in [0,1]");
    if (accesses < 1)
        throw InvalidConfig("profile needs at least one access");
}

AccessTrace gen_trace(const WorkloadProfile& profile, const DramConfig& cfg,
                      Cycle think_cycles) {
    profile.validate();
    std::mt19937_64 rng(mix_seed(profile.seed, 0x74726163));
    AccessTrace trace;
    trace.think_cycles = think_cycles;
    trace.steps.reserve(static_cast<size_t>(profile.accesses));
    const int total_banks = cfg.total_banks();
    constexpr RowId kRows = 1 << 15; // rows per bank drawn uniformly
    TraceStep last{0, 0};
    bool have_last = false;
    for (std::int64_t i = 0; i < profile.accesses; ++i) {
        if (have_last && uniform01(rng) < profile.row_reuse_prob) {
            trace.steps.push_back(last);
            continue;
        }
        last.bank = static_cast<int>(rng() % static_cast<std::uint64_t>(total_banks));
        last.row = static_cast<RowId>(rng() % kRows);
        have_last = true;
        trace.steps.push_back(last);
    }
    return trace;
}

Cycle run_trace(const std::vector<AccessTrace>& traces, const DramConfig& cfg,
                RowPolicy policy) {
    DramConfig dc = cfg;
    dc.row_policy = policy;
    DramSystem dram(dc);

    struct Core {
        const AccessTrace* trace;
        size_t next = 0;
        Cycle ready = 0; // issue time of the next access
    };
    std::vector<Core> cores;
    for (const AccessTrace& t : traces)
        cores.push_back(Core{&t});

    Cycle makespan = 0;
    while (true) {
        // Blocking cores: pick the earliest ready access across cores.
        Core* next_core = nullptr;
        for (Core& c : cores)
            if (c.next < c.trace->steps.size() &&
                (next_core == nullptr || c.ready < next_core->ready))
                next_core = &c;
        if (next_core == nullptr)
            break;
        dram.expire_rows(next_core->ready);
        const TraceStep& step = next_core->trace->steps[next_core->next];
        MemoryAccess acc;
        acc.process_id = static_cast<ProcessId>(next_core - cores.data());
        acc.bank = step.bank;
        acc.row = step.row;
        acc.issue_cycle = next_core->ready;
        acc.origin = Origin::Host;
        const AccessOutcome out = dram.access(acc);
        next_core->ready = out.completion_cycle + next_core->trace->think_cycles;
        makespan = std::max(makespan, out.completion_cycle);
        ++next_core->next;
    }
    return makespan;
}

OverheadReport overhead_report(const std::vector<WorkloadProfile>& profiles,
                               const DramConfig& cfg, Cycle think_cycles) {
    if (profiles.empty())
        throw InvalidConfig("overhead report needs at least one profile");
    OverheadReport report;
    double crp_sum = 0.0, ctd_sum = 0.0;
    for (const WorkloadProfile& p : profiles) {
        // Two instances of the same workload share the input (same banks).
        WorkloadProfile second = p;
        second.seed = mix_seed(p.seed, 0x636f7265);
        const std::vector<AccessTrace> traces = {gen_trace(p, cfg, think_cycles),
                                                 gen_trace(second, cfg, think_cycles)};
        ProfileOverhead row;
        row.name = p.name;
        row.row_reuse_prob = p.row_reuse_prob;
        row.baseline_cycles = run_trace(traces, cfg, RowPolicy::OpenTimeout);
        row.crp_cycles = run_trace(traces, cfg, RowPolicy::ClosedRow);
        row.ctd_cycles = run_trace(traces, cfg, RowPolicy::ConstantTime);
        row.crp_overhead_pct = 100.0 *
                               (static_cast<double>(row.crp_cycles) /
                                    static_cast<double>(row.baseline_cycles) -
                                1.0);
        row.ctd_overhead_pct = 100.0 *
                               (static_cast<double>(row.ctd_cycles) /
                                    static_cast<double>(row.baseline_cycles) -
                                1.0);
        crp_sum += row.crp_overhead_pct;
        ctd_sum += row.ctd_overhead_pct;
        report.profiles.push_back(std::move(row));
    }
    report.mean_crp_overhead_pct = crp_sum / static_cast<double>(profiles.size());
    report.mean_ctd_overhead_pct = ctd_sum / static_cast<double>(profiles.size());
    return report;
}

std::vector<WorkloadProfile> default_profiles() {
    // MPKI per workload ranks the reuse probabilities: lower MPKI, higher reuse.
    return {
        WorkloadProfile{"bc", 0.57, 0.99, 40000, 11},
        WorkloadProfile{"pr", 1.86, 0.95, 40000, 12},
        WorkloadProfile{"tc", 5.08, 0.55, 40000, 13},
        WorkloadProfile{"bfs", 38.59, 0.20, 40000, 14},
        WorkloadProfile{"cc", 45.2, 0.12, 40000, 15},
    };
}

} // namespace impact
