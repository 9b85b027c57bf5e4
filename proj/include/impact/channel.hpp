#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "impact/dram.hpp"
#include "impact/pim.hpp"
#include "impact/sync.hpp"

namespace impact {

enum class ChannelKind { PnM, PuM };
enum class SyncKind { Semaphore, Barrier };

const char* to_string(ChannelKind k);

/// Background accesses from prefetchers / page-table walkers, modeled as a
/// Poisson process per bank. rate 0 disables noise; a fixed seed fixes the
/// arrival sequence.
struct NoiseModel {
    double rate_per_kilocycle = 0.0;
    std::uint64_t seed = 0;
};

struct ChannelConfig {
    int batch_size = 4;
    Cycle threshold_cycles = 150;
    Cycle sync_cost_cycles = 16;
    SyncKind sync = SyncKind::Semaphore; // PnM; PuM runs on barriers
    NoiseModel noise;
    int calibration_samples = 32;

    void validate(const DramConfig& dram) const;
};

struct ChannelResult {
    std::int64_t bits_sent = 0;
    std::int64_t bits_correct = 0;
    double error_rate = 0.0;
    Cycle total_cycles = 0;
    double throughput_mbps = 0.0;
    Cycle sender_cycles = 0;
    Cycle receiver_cycles = 0;

    bool operator==(const ChannelResult&) const = default;
};

/// One timed receiver probe: what was measured and how it decoded.
struct ProbeRecord {
    int turn;
    int bank;
    Cycle latency_cycles;
    int decoded_bit;
    int sent_bit;
};

using BitVec = std::vector<std::uint8_t>;

BitVec bits_from_hex(const std::string& hex);
BitVec random_bits(std::int64_t n, std::uint64_t seed);

/// Midpoint-of-means threshold; throws CalibrationFailed unless it separates
/// the two sample sets strictly.
Cycle threshold_from_samples(std::span<const Cycle> hit_samples,
                             std::span<const Cycle> conflict_samples);

/// IMPACT covert channel: cooperatively scheduled sender/receiver processes
/// over one DramSystem/PimEngine pair. Deterministic under a fixed seed.
class CovertChannel {
  public:
    CovertChannel(const DramConfig& dram, const PimConfig& pim, const ChannelConfig& chan);

    ChannelResult transmit(ChannelKind kind, const BitVec& message);

    /// Probes hit and conflict latencies on a quiescent copy of the bank
    /// state and returns the decode threshold between them.
    Cycle calibrate_threshold() const;

    const std::vector<ProbeRecord>& probes() const { return probes_; }
    DramSystem& dram() { return dram_; }
    PimEngine& pim() { return pim_; }
    const ChannelConfig& config() const { return chan_; }

  private:
    struct NoiseBank {
        PoissonStream arrivals;
        std::mt19937_64 rows;
    };

    ChannelResult pnm_transmit(const BitVec& message);
    ChannelResult pum_transmit(const BitVec& message);
    void apply_noise(int bank, Cycle upto);
    Addr line_addr(int bank, RowId row, int* cursor) const;
    ChannelResult finish(const BitVec& message, const BitVec& decoded, Cycle window_start,
                         Cycle window_end, Cycle sender_busy, Cycle receiver_busy) const;

    DramSystem dram_;
    PimEngine pim_;
    ChannelConfig chan_;
    std::vector<ProbeRecord> probes_;
    std::vector<NoiseBank> noise_;
};

/// Experiment wrapper: applies the controller policy (and, for partition,
/// the sender/receiver bank split), wires noise and runs one transmission.
struct ChannelRunSpec {
    ChannelKind kind = ChannelKind::PnM;
    RowPolicy policy = RowPolicy::OpenTimeout;
    bool partition = false; // MPR: sender and receiver get disjoint halves
    BitVec message;
    DramConfig dram;
    PimConfig pim;
    ChannelConfig channel;
};

ChannelResult run_channel(const ChannelRunSpec& spec);

// Logical process ids used by the channel protocols.
inline constexpr ProcessId kSenderPid = 1;
inline constexpr ProcessId kReceiverPid = 2;

} // namespace impact
