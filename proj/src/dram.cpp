#include "impact/dram.hpp"

#include <algorithm>
#include <cmath>

namespace impact {

const char* to_string(RowPolicy p) {
    switch (p) {
        case RowPolicy::OpenTimeout: return "open";
        case RowPolicy::ClosedRow: return "closed";
        case RowPolicy::ConstantTime: return "constant";
    }
    return "?";
}

const char* to_string(AccessKind k) {
    switch (k) {
        case AccessKind::Hit: return "hit";
        case AccessKind::Conflict: return "conflict";
        case AccessKind::Empty: return "empty";
    }
    return "?";
}

Cycle ns_to_cycles(double ns, double clock_ghz) {
    if (ns < 0.0 || clock_ghz <= 0.0)
        throw InvalidConfig("ns_to_cycles: ns must be >= 0 and clock > 0");
    return static_cast<Cycle>(std::ceil(ns * clock_ghz));
}

void DramConfig::validate() const {
    if (t_rcd_ns <= 0 || t_rp_ns <= 0 || t_ras_ns <= 0 || clock_ghz <= 0)
        throw InvalidConfig("dram timings and clock must be strictly positive");
    if (t_ras_ns < t_rcd_ns)
        throw InvalidConfig("t_ras_ns must be >= t_rcd_ns");
    if (n_channels < 1 || n_ranks < 1 || n_banks < 1)
        throw InvalidConfig("channel/rank/bank counts must be >= 1");
    if ((n_banks & (n_banks - 1)) != 0)
        throw InvalidConfig("n_banks must be a power of two");
    if (row_size_bytes < 1)
        throw InvalidConfig("row_size_bytes must be >= 1");
    if (column_access_cycles < 0 || controller_overhead_cycles < 0)
        throw InvalidConfig("cycle constants must be >= 0");
    if (row_policy == RowPolicy::OpenTimeout && row_timeout_ns <= 0)
        throw InvalidConfig("row_timeout_ns must be positive under the open policy");
    if (partition_map) {
        std::set<int> seen;
        for (const auto& [pid, bankset] : *partition_map) {
            for (int b : bankset) {
                if (b < 0 || b >= total_banks())
                    throw InvalidConfig("partition map references bank outside geometry");
                if (!seen.insert(b).second)
                    throw InvalidConfig("partition bank sets must be disjoint");
            }
        }
    }
}

AddressParts map_address(Addr phys_addr, const DramConfig& cfg) {
    if (phys_addr < 0)
        throw InvalidConfig("physical address must be non-negative");
    AddressParts p;
    p.column = static_cast<int>(phys_addr % cfg.row_size_bytes);
    const Addr page = phys_addr / cfg.row_size_bytes;
    const int total = cfg.total_banks();
    p.flat_bank = static_cast<int>(page % total);
    p.row = page / total;
    p.bank = p.flat_bank % cfg.n_banks;
    p.rank = (p.flat_bank / cfg.n_banks) % cfg.n_ranks;
    p.channel = p.flat_bank / (cfg.n_banks * cfg.n_ranks);
    return p;
}

Addr unmap_address(const AddressParts& parts, const DramConfig& cfg) {
    const int flat = parts.channel * cfg.n_ranks * cfg.n_banks + parts.rank * cfg.n_banks + parts.bank;
    const Addr page = parts.row * cfg.total_banks() + flat;
    return page * cfg.row_size_bytes + parts.column;
}

Addr bank_row_addr(int flat_bank, RowId row, const DramConfig& cfg) {
    return (row * cfg.total_banks() + flat_bank) * cfg.row_size_bytes;
}

DramSystem::DramSystem(DramConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    banks_.resize(static_cast<size_t>(cfg_.total_banks()));
}

void DramSystem::check_partition(ProcessId pid, int bank) const {
    if (!cfg_.partition_map)
        return;
    auto it = cfg_.partition_map->find(pid);
    if (it == cfg_.partition_map->end() || it->second.count(bank) == 0)
        throw PartitionViolation("process " + std::to_string(pid) + " may not access bank " +
                                 std::to_string(bank));
}

void DramSystem::log_cmd(DramCommand cmd, int bank, RowId row, Cycle cycle, ProcessId pid) {
    if (log_enabled_)
        log_.push_back(CommandRecord{cmd, bank, row, cycle, pid});
}

AccessOutcome DramSystem::access(const MemoryAccess& acc) {
    if (acc.bank < 0 || acc.bank >= cfg_.total_banks())
        throw InvalidConfig("access targets bank outside geometry");
    if (acc.issue_cycle < 0)
        throw InvalidConfig("issue_cycle must be >= 0");
    check_partition(acc.process_id, acc.bank);

    BankState& b = banks_[static_cast<size_t>(acc.bank)];
    const Cycle start = std::max(acc.issue_cycle, b.busy_until_cycle);

    AccessOutcome out;
    if (!b.open_row)
        out.kind = AccessKind::Empty;
    else if (*b.open_row == acc.row)
        out.kind = AccessKind::Hit;
    else
        out.kind = AccessKind::Conflict;

    const Cycle hit_lat = cfg_.hit_latency();
    Cycle busy_extra = 0; // occupancy past the data return (closed-row precharge)

    switch (cfg_.row_policy) {
        case RowPolicy::OpenTimeout:
        case RowPolicy::ConstantTime: {
            if (out.kind == AccessKind::Hit) {
                out.latency_cycles = hit_lat;
            } else if (out.kind == AccessKind::Empty) {
                log_cmd(DramCommand::Activate, acc.bank, acc.row, start, acc.process_id);
                b.last_activate_cycle = start;
                out.latency_cycles = hit_lat + cfg_.trcd_cycles();
            } else {
                // Precharge may not precede the prior activation by tRAS.
                const Cycle pre = std::max(start, b.last_activate_cycle + cfg_.tras_cycles());
                const Cycle stall = pre - start;
                log_cmd(DramCommand::Precharge, acc.bank, *b.open_row, pre, acc.process_id);
                const Cycle act = pre + cfg_.trp_cycles();
                log_cmd(DramCommand::Activate, acc.bank, acc.row, act, acc.process_id);
                b.last_activate_cycle = act;
                out.latency_cycles = hit_lat + cfg_.trp_cycles() + cfg_.trcd_cycles() + stall;
            }
            b.open_row = acc.row;
            if (cfg_.row_policy == RowPolicy::ConstantTime)
                out.latency_cycles = cfg_.conflict_latency(); // worst case, always
            break;
        }
        case RowPolicy::ClosedRow: {
            // Every access pays the full activate path; row closes afterward.
            log_cmd(DramCommand::Activate, acc.bank, acc.row, start, acc.process_id);
            b.last_activate_cycle = start;
            out.latency_cycles = hit_lat + cfg_.trcd_cycles();
            const Cycle completion = start + out.latency_cycles;
            const Cycle pre = std::max(completion, b.last_activate_cycle + cfg_.tras_cycles());
            log_cmd(DramCommand::Precharge, acc.bank, acc.row, pre, acc.process_id);
            b.open_row.reset();
            busy_extra = (pre + cfg_.trp_cycles()) - completion;
            break;
        }
    }

    out.completion_cycle = start + out.latency_cycles;
    b.busy_until_cycle = out.completion_cycle + busy_extra;
    b.last_use_cycle = out.completion_cycle;
    return out;
}

void DramSystem::expire_rows(Cycle now) {
    if (cfg_.row_policy != RowPolicy::OpenTimeout)
        return;
    const Cycle timeout = cfg_.timeout_cycles();
    for (size_t i = 0; i < banks_.size(); ++i) {
        BankState& b = banks_[i];
        if (!b.open_row || now - b.last_use_cycle < timeout)
            continue;
        const Cycle pre = std::max(b.last_use_cycle + timeout, b.last_activate_cycle + cfg_.tras_cycles());
        log_cmd(DramCommand::Precharge, static_cast<int>(i), *b.open_row, pre, -1);
        b.open_row.reset();
        b.busy_until_cycle = std::max(b.busy_until_cycle, pre + cfg_.trp_cycles());
    }
}

void DramSystem::force_activate(int bank, RowId row, Cycle at, ProcessId process) {
    BankState& b = banks_.at(static_cast<size_t>(bank));
    log_cmd(DramCommand::Activate, bank, row, at, process);
    b.open_row = row;
    b.last_activate_cycle = at;
    b.last_use_cycle = std::max(b.last_use_cycle, at);
    b.busy_until_cycle = std::max(b.busy_until_cycle, at);
}

bool tras_respected(std::span<const CommandRecord> log, const DramConfig& cfg) {
    std::map<int, Cycle> last_act;
    const Cycle tras = cfg.tras_cycles();
    for (const CommandRecord& r : log) {
        if (r.cmd == DramCommand::Activate) {
            last_act[r.bank] = r.cycle;
        } else {
            auto it = last_act.find(r.bank);
            if (it != last_act.end() && r.cycle - it->second < tras)
                return false;
        }
    }
    return true;
}

} // namespace impact
