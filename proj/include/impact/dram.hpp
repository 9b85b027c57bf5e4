#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "impact/errors.hpp"

namespace impact {

using Cycle = std::int64_t;
using RowId = std::int64_t;
using Addr = std::int64_t;
using ProcessId = std::int32_t;

enum class RowPolicy { OpenTimeout, ClosedRow, ConstantTime };
enum class AccessKind { Hit, Conflict, Empty };
enum class Origin { Host, MemoryPcu };

const char* to_string(RowPolicy p);
const char* to_string(AccessKind k);

/// Converts a nanosecond timing parameter to CPU cycles, rounding up.
Cycle ns_to_cycles(double ns, double clock_ghz);

/// DRAM geometry, command timings and controller policy. All latencies in the
/// simulation derive from these fields; the calibration constants
/// (column_access_cycles, controller_overhead_cycles) live here, not in code.
struct DramConfig {
    double t_rcd_ns = 13.5;
    double t_rp_ns = 13.5;
    double t_ras_ns = 13.5;
    double clock_ghz = 2.6;
    int column_access_cycles = 56;
    int controller_overhead_cycles = 8;
    int n_channels = 1;
    int n_ranks = 4;
    int n_banks = 16; // banks per rank, power of two
    int row_size_bytes = 8192;
    RowPolicy row_policy = RowPolicy::OpenTimeout;
    double row_timeout_ns = 100.0;
    std::optional<std::map<ProcessId, std::set<int>>> partition_map;

    int total_banks() const { return n_channels * n_ranks * n_banks; }
    Cycle trcd_cycles() const { return ns_to_cycles(t_rcd_ns, clock_ghz); }
    Cycle trp_cycles() const { return ns_to_cycles(t_rp_ns, clock_ghz); }
    Cycle tras_cycles() const { return ns_to_cycles(t_ras_ns, clock_ghz); }
    Cycle timeout_cycles() const { return ns_to_cycles(row_timeout_ns, clock_ghz); }

    // Per-access service latency by outcome class.
    Cycle hit_latency() const { return column_access_cycles + controller_overhead_cycles; }
    Cycle empty_latency() const { return hit_latency() + trcd_cycles(); }
    Cycle conflict_latency() const { return hit_latency() + trp_cycles() + trcd_cycles(); }

    void validate() const; // throws InvalidConfig
};

struct BankState {
    std::optional<RowId> open_row;
    Cycle last_activate_cycle = -1;
    Cycle busy_until_cycle = 0;
    Cycle last_use_cycle = 0;
};

struct MemoryAccess {
    ProcessId process_id = 0;
    int bank = 0; // flat bank index, < total_banks()
    RowId row = 0;
    Cycle issue_cycle = 0;
    Origin origin = Origin::Host;
};

struct AccessOutcome {
    AccessKind kind = AccessKind::Empty;
    Cycle latency_cycles = 0;
    Cycle completion_cycle = 0;
};

enum class DramCommand { Activate, Precharge };

struct CommandRecord {
    DramCommand cmd;
    int bank;
    RowId row;
    Cycle cycle;
    ProcessId process;
};

struct AddressParts {
    int channel = 0;
    int rank = 0;
    int bank = 0;
    RowId row = 0;
    int column = 0;
    int flat_bank = 0;
};

/// Page-interleaved address mapping: consecutive row-sized pages walk the
/// banks round-robin, then advance the row. Exactly invertible.
AddressParts map_address(Addr phys_addr, const DramConfig& cfg);
Addr unmap_address(const AddressParts& parts, const DramConfig& cfg);

/// First byte of (flat bank, row) under the page-interleaved mapping.
Addr bank_row_addr(int flat_bank, RowId row, const DramConfig& cfg);

/// Bank states plus the command log for one memory subsystem instance.
/// Single-threaded; distinct instances share nothing.
class DramSystem {
  public:
    explicit DramSystem(DramConfig cfg);

    /// Serves one access, updating bank state and the command log.
    /// Throws PartitionViolation when a partition map forbids the bank.
    AccessOutcome access(const MemoryAccess& acc);

    /// Precharges every open row idle for at least the configured timeout.
    /// No-op under ClosedRow/ConstantTime (rows are already closed or timing
    /// is policy-fixed). Invoked by event loops at their sync points.
    void expire_rows(Cycle now);

    /// Activates `row` without consuming access latency. Used by RowClone's
    /// destination step and by tests that need a prepared bank state.
    void force_activate(int bank, RowId row, Cycle at, ProcessId process);

    const DramConfig& config() const { return cfg_; }
    const BankState& bank(int b) const { return banks_.at(static_cast<size_t>(b)); }
    BankState& bank_mut(int b) { return banks_.at(static_cast<size_t>(b)); }

    /// Command logging is off by default; invariant checks switch it on.
    void set_command_log(bool enabled) { log_enabled_ = enabled; }
    std::span<const CommandRecord> command_log() const { return log_; }
    void clear_command_log() { log_.clear(); }

  private:
    void check_partition(ProcessId pid, int bank) const;
    void log_cmd(DramCommand cmd, int bank, RowId row, Cycle cycle, ProcessId pid);

    DramConfig cfg_;
    std::vector<BankState> banks_;
    std::vector<CommandRecord> log_;
    bool log_enabled_ = false;
};

/// Scans a command log for restoration-time violations: every Precharge must
/// trail the preceding Activate on the same bank by at least tRAS.
bool tras_respected(std::span<const CommandRecord> log, const DramConfig& cfg);

} // namespace impact
