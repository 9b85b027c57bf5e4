#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "impact/channel.hpp"
#include "impact/dram.hpp"
#include "impact/pim.hpp"
#include "impact/sync.hpp"

namespace impact {

/// Reference hash table distributed over banks by page interleaving.
struct HashTableLayout {
    std::int64_t n_entries = 0;
    int entry_size_bytes = 0;
    int entries_per_row = 0;
    int rows_per_bank = 0; // table rows resident in each bank
    int n_banks = 0;       // flat banks covered (total_banks of the config)
    int row_size_bytes = 0;
    Addr base_addr = 0;

    struct Place {
        int bank;
        RowId row;
        int slot;
        Addr addr;
    };
    Place place(std::int64_t entry) const;
};

/// Throws SizeMismatch unless entry_size divides the row size.
HashTableLayout build_layout(std::int64_t n_entries, int entry_size_bytes,
                             const DramConfig& cfg);

/// Synthetic read-mapping victim: seeded reads over {A,C,G,T}, a seeded
/// multiplicative hash from seeds to table entries, and a cycle cost model
/// (per-seed compute plus per-64B entry read with alignment work).
struct VictimModel {
    int read_len = 100;
    int seed_len = 21;
    int accesses_per_read = 4; // seeds hashed per read
    std::int64_t n_reads = 1'000'000;
    std::uint64_t rng_seed = 1;
    Cycle compute_cycles_per_seed = 1778;
    Cycle align_cycles_per_read = 101; // per 64-byte entry read

    void validate() const;
};

std::int64_t hash_seed_to_entry(const std::string& seed, std::uint64_t basis,
                                std::int64_t n_entries);

struct ActivationEvent {
    int bank;
    RowId row;
    Cycle cycle;
};

struct ProbeObservation {
    int bank;
    RowId probed_row;
    Cycle latency_cycles;
    bool inferred_active;
};

struct RowInference {
    int bank;
    RowId row;
    Cycle window_begin;
    Cycle window_end;
};

struct SideChannelResult {
    double throughput_mbps = 0.0;
    double error_rate = 0.0;
    double identification_accuracy = 0.0;
    int candidates_per_hit = 0;
    Cycle total_cycles = 0;
    std::int64_t truth_activations = 0;
    std::int64_t inference_count = 0;
    std::int64_t correct_inferences = 0;
    double bits_per_identification = 0.0;
};

/// Scores inferences against the ground-truth activation log. An inference is
/// correct when an unconsumed activation of the same row falls inside its
/// probe window; accuracy is the fraction of activations so consumed.
SideChannelResult evaluate(std::vector<ActivationEvent> truth,
                           const std::vector<RowInference>& inferences,
                           const HashTableLayout& layout, double clock_ghz,
                           Cycle total_cycles);

struct SideChannelSpec {
    DramConfig dram;     // n_ranks = n_channels = 1 for the bank sweeps
    PimConfig pim;
    VictimModel victim;
    int entry_size_bytes = 512;
    int rows_per_bank = 1;
    Cycle threshold_cycles = 150;
    Cycle attacker_think_cycles = 200;
    NoiseModel noise{0.011, 0};
    int rounds = 40;
};

struct NoiseBankStream {
    PoissonStream arrivals;
    std::mt19937_64 rows;
};

/// Victim and attacker as logical processes over one shared event loop,
/// interleaved per bank in cycle order.
class SideChannelSim {
  public:
    explicit SideChannelSim(const SideChannelSpec& spec);

    SideChannelResult run();

    /// Runs the victim alone for `n_reads` reads, applying accesses
    /// immediately; returns the ground-truth activation log.
    std::vector<ActivationEvent> victim_round(std::int64_t n_reads);

    /// One attacker sweep over all banks against the current bank state.
    std::vector<ProbeObservation> attacker_round();

    const HashTableLayout& layout() const { return layout_; }
    const std::vector<RowInference>& inferences() const { return inferences_; }
    const std::vector<ActivationEvent>& truth() const { return truth_; }
    DramSystem& dram() { return dram_; }

  private:
    struct PlannedAccess {
        Cycle cycle;
        Addr addr;
    };

    void generate_victim_until(Cycle t);
    void drain_bank(int bank, Cycle t);
    void apply_victim_access(const PlannedAccess& pa);
    ProbeObservation probe_bank(int bank);

    SideChannelSpec spec_;
    DramSystem dram_;
    PimEngine pim_;
    HashTableLayout layout_;

    std::mt19937_64 victim_rng_;
    std::uint64_t hash_basis_;
    Cycle victim_clock_ = 0;
    std::int64_t reads_done_ = 0;
    std::vector<std::deque<PlannedAccess>> pending_;
    std::vector<NoiseBankStream> noise_;

    Cycle attacker_clock_ = 0;
    std::vector<Cycle> prev_probe_;
    std::vector<int> sentinel_cursor_;
    std::vector<std::vector<int>> candidate_cursor_;

    std::vector<ActivationEvent> truth_;
    std::vector<RowInference> inferences_;
    std::vector<ProbeObservation> observations_;
};

} // namespace impact
