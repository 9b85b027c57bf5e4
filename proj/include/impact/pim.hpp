#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "impact/dram.hpp"

namespace impact {

enum class PeiOp { Add, Nop };
enum class PcuSite { HostPcu, MemoryPcu };

const char* to_string(PcuSite s);

struct PimConfig {
    int pei_op_latency_cycles = 3;
    Cycle offload_transit_cycles = 30;
    Cycle rowclone_issue_overhead_cycles = 37;
    int pmu_capacity = 256;
    int pmu_routing_threshold = 2;
    Cycle host_pei_cycles = 20; // host-side PCU path (caches absorb the access)

    void validate() const;
};

struct PeiRequest {
    ProcessId process_id = 0;
    Addr target_addr = 0;
    PeiOp op = PeiOp::Add;
};

/// Source and destination page ranges plus the per-bank copy mask. Both
/// ranges span one page per bank of the channel, in bank order.
struct RowCloneRequest {
    ProcessId process_id = 0;
    Addr src_base = 0;
    Addr dst_base = 0;
    std::uint64_t mask = 0; // bit b selects bank b
};

struct PimCompletion {
    Cycle latency_cycles = 0;
    std::vector<AccessOutcome> per_bank_outcomes;
    PcuSite routed_to = PcuSite::MemoryPcu;
};

/// PEI management unit: tracks cache-line-granularity locality and routes
/// each PEI to the host or the near-bank PCU. Entries allocated by a PiM
/// operation carry an ignore flag so their first hit is not counted.
class LocalityMonitor {
  public:
    LocalityMonitor(int capacity, int routing_threshold);

    PcuSite route(Addr line_tag);
    size_t size() const { return lru_.size(); }

  private:
    struct Entry {
        Addr tag;
        bool ignore;
        int hits;
    };

    int capacity_;
    int threshold_;
    std::list<Entry> lru_; // front = most recent
    std::unordered_map<Addr, std::list<Entry>::iterator> index_;
};

/// Executes PiM operations against a DramSystem: PEIs (near-bank adds routed
/// through the locality monitor) and RowClone Fast Parallel Mode bulk copies.
class PimEngine {
  public:
    PimEngine(DramSystem& dram, PimConfig cfg);

    /// Monitor decision for this request (also updates monitor state).
    PcuSite route_pei(const PeiRequest& req);

    PimCompletion execute_pei(const PeiRequest& req, Cycle now);
    PimCompletion execute_rowclone(const RowCloneRequest& req, Cycle now);

    const PimConfig& config() const { return cfg_; }
    DramSystem& dram() { return dram_; }

  private:
    DramSystem& dram_;
    PimConfig cfg_;
    LocalityMonitor monitor_;
};

} // namespace impact
