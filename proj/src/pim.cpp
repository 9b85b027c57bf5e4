#include "impact/pim.hpp"

#include <algorithm>
#include <bit>

namespace impact {

namespace {
constexpr int kLineShift = 6; // 64-byte cache lines
}

const char* to_string(PcuSite s) {
    return s == PcuSite::HostPcu ? "host-pcu" : "memory-pcu";
}

void PimConfig::validate() const {
    if (pei_op_latency_cycles < 0 || offload_transit_cycles < 0 ||
        rowclone_issue_overhead_cycles < 0 || host_pei_cycles < 0)
        throw InvalidConfig("pim cycle constants must be >= 0");
    if (pmu_capacity < 1 || pmu_routing_threshold < 1)
        throw InvalidConfig("pmu capacity and threshold must be >= 1");
}

LocalityMonitor::LocalityMonitor(int capacity, int routing_threshold)
    : capacity_(capacity), threshold_(routing_threshold) {}

PcuSite LocalityMonitor::route(Addr line_tag) {
    auto it = index_.find(line_tag);
    if (it == index_.end()) {
        // Miss: allocate with the ignore flag set, evicting the LRU entry.
        if (static_cast<int>(lru_.size()) >= capacity_) {
            index_.erase(lru_.back().tag);
            lru_.pop_back();
        }
        lru_.push_front(Entry{line_tag, true, 0});
        index_[line_tag] = lru_.begin();
        return PcuSite::MemoryPcu;
    }
    Entry& e = *it->second;
    lru_.splice(lru_.begin(), lru_, it->second);
    if (e.ignore) {
        // First hit to a PiM-allocated entry: clear the flag, do not count.
        e.ignore = false;
        return PcuSite::MemoryPcu;
    }
    e.hits += 1;
    return e.hits >= threshold_ ? PcuSite::HostPcu : PcuSite::MemoryPcu;
}

PimEngine::PimEngine(DramSystem& dram, PimConfig cfg)
    : dram_(dram), cfg_(std::move(cfg)), monitor_(cfg_.pmu_capacity, cfg_.pmu_routing_threshold) {
    cfg_.validate();
}

PcuSite PimEngine::route_pei(const PeiRequest& req) {
    return monitor_.route(req.target_addr >> kLineShift);
}

PimCompletion PimEngine::execute_pei(const PeiRequest& req, Cycle now) {
    PimCompletion done;
    if (req.op == PeiOp::Nop) {
        done.routed_to = PcuSite::HostPcu;
        done.latency_cycles = 0;
        return done;
    }
    done.routed_to = route_pei(req);
    if (done.routed_to == PcuSite::HostPcu) {
        // Served by the host-side PCU out of the cache hierarchy: no DRAM
        // state changes, fixed host path cost.
        done.latency_cycles = cfg_.host_pei_cycles;
        return done;
    }
    const AddressParts parts = map_address(req.target_addr, dram_.config());
    MemoryAccess acc;
    acc.process_id = req.process_id;
    acc.bank = parts.flat_bank;
    acc.row = parts.row;
    acc.issue_cycle = now + cfg_.offload_transit_cycles;
    acc.origin = Origin::MemoryPcu;
    const AccessOutcome out = dram_.access(acc);
    done.per_bank_outcomes.push_back(out);
    done.latency_cycles = cfg_.offload_transit_cycles + out.latency_cycles +
                          cfg_.pei_op_latency_cycles;
    return done;
}

PimCompletion PimEngine::execute_rowclone(const RowCloneRequest& req, Cycle now) {
    if (req.mask == 0)
        throw MaskRangeMismatch("rowclone mask must select at least one bank");

    const DramConfig& dc = dram_.config();
    const AddressParts src0 = map_address(req.src_base, dc);
    const AddressParts dst0 = map_address(req.dst_base, dc);
    if (src0.column != 0 || dst0.column != 0)
        throw MaskRangeMismatch("rowclone ranges must be row-aligned");
    // Ranges cover one page per bank starting at the base page; both must
    // cover the same bank set (here: banks 0..n_banks-1 of the base page).
    if (src0.flat_bank != dst0.flat_bank)
        throw MaskRangeMismatch("src and dst ranges map to different bank sets");
    const int n = dc.n_banks;
    if (n > 64 || static_cast<int>(std::bit_width(req.mask)) > n)
        throw MaskRangeMismatch("mask selects a bank outside the operand ranges");

    const Cycle issue = now + cfg_.rowclone_issue_overhead_cycles;
    PimCompletion done;
    done.routed_to = PcuSite::MemoryPcu;
    Cycle max_delta = 0;
    for (int b = 0; b < n; ++b) {
        if ((req.mask >> b & 1) == 0)
            continue; // unmasked banks are untouched
        const Addr src_addr = req.src_base + static_cast<Addr>(b) * dc.row_size_bytes;
        const Addr dst_addr = req.dst_base + static_cast<Addr>(b) * dc.row_size_bytes;
        const AddressParts src = map_address(src_addr, dc);
        const AddressParts dst = map_address(dst_addr, dc);
        if (src.row == dst.row)
            throw MaskRangeMismatch("src and dst rows coincide in bank " + std::to_string(b));

        // Fast Parallel Mode: activate src through the normal access path
        // (this is where the row-buffer timing class shows), then activate
        // dst back-to-back once the source row is restored.
        MemoryAccess acc;
        acc.process_id = req.process_id;
        acc.bank = src.flat_bank;
        acc.row = src.row;
        acc.issue_cycle = issue;
        acc.origin = Origin::MemoryPcu;
        AccessOutcome out = dram_.access(acc);
        const Cycle dst_act = out.completion_cycle;
        dram_.force_activate(dst.flat_bank, dst.row, dst_act, req.process_id);
        const Cycle bank_done = dst_act + dc.tras_cycles();
        dram_.bank_mut(dst.flat_bank).busy_until_cycle = bank_done;
        dram_.bank_mut(dst.flat_bank).last_use_cycle = bank_done;

        out.completion_cycle = bank_done;
        out.latency_cycles = bank_done - issue;
        max_delta = std::max(max_delta, out.latency_cycles);
        done.per_bank_outcomes.push_back(out);
    }
    done.latency_cycles = cfg_.rowclone_issue_overhead_cycles + max_delta;
    return done;
}

} // namespace impact
