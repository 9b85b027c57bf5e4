#include "impact/dnarm.hpp"

#include <algorithm>
#include <cmath>

namespace impact {

namespace {
constexpr ProcessId kVictimPid = 3;
constexpr ProcessId kAttackerPid = 4;
constexpr ProcessId kNoisePid = -2;
constexpr RowId kNoiseRowBase = 1 << 20;
constexpr char kBases[] = {'A', 'C', 'G', 'T'};
} // namespace

HashTableLayout::Place HashTableLayout::place(std::int64_t entry) const {
    const Addr addr = base_addr + entry * entry_size_bytes;
    const Addr page = addr / row_size_bytes;
    Place p;
    p.bank = static_cast<int>(page % n_banks);
    p.row = page / n_banks;
    p.slot = static_cast<int>((addr % row_size_bytes) / entry_size_bytes);
    p.addr = addr;
    return p;
}

HashTableLayout build_layout(std::int64_t n_entries, int entry_size_bytes,
                             const DramConfig& cfg) {
    if (n_entries < 1 || entry_size_bytes < 1)
        throw SizeMismatch("hash table needs positive entry count and size");
    if (cfg.row_size_bytes % entry_size_bytes != 0)
        throw SizeMismatch("entry size " + std::to_string(entry_size_bytes) +
                           " does not divide row size " + std::to_string(cfg.row_size_bytes));
    HashTableLayout layout;
    layout.n_entries = n_entries;
    layout.entry_size_bytes = entry_size_bytes;
    layout.entries_per_row = cfg.row_size_bytes / entry_size_bytes;
    layout.n_banks = cfg.total_banks();
    layout.row_size_bytes = cfg.row_size_bytes;
    layout.base_addr = 0;
    const std::int64_t rows =
        (n_entries + layout.entries_per_row - 1) / layout.entries_per_row;
    layout.rows_per_bank = static_cast<int>((rows + layout.n_banks - 1) / layout.n_banks);
    return layout;
}

void VictimModel::validate() const {
    if (read_len < seed_len || seed_len < 1 || accesses_per_read < 1)
        throw InvalidConfig("victim read/seed geometry invalid");
    if (compute_cycles_per_seed < 0 || align_cycles_per_read < 0)
        throw InvalidConfig("victim cycle costs must be >= 0");
}

std::int64_t hash_seed_to_entry(const std::string& seed, std::uint64_t basis,
                                std::int64_t n_entries) {
    std::uint64_t h = basis;
    for (char c : seed) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::int64_t>(h % static_cast<std::uint64_t>(n_entries));
}

SideChannelResult evaluate(std::vector<ActivationEvent> truth,
                           const std::vector<RowInference>& inferences,
                           const HashTableLayout& layout, double clock_ghz,
                           Cycle total_cycles) {
    SideChannelResult res;
    res.candidates_per_hit = layout.entries_per_row;
    res.total_cycles = total_cycles;
    res.truth_activations = static_cast<std::int64_t>(truth.size());
    res.inference_count = static_cast<std::int64_t>(inferences.size());
    const double total_rows =
        static_cast<double>(layout.rows_per_bank) * static_cast<double>(layout.n_banks);
    res.bits_per_identification = std::log2(std::max(2.0, total_rows));

    std::vector<bool> consumed(truth.size(), false);
    std::int64_t matched_truth = 0;
    for (const RowInference& inf : inferences) {
        // Latest unconsumed activation of the inferred row inside the window.
        std::int64_t best = -1;
        for (std::int64_t i = static_cast<std::int64_t>(truth.size()) - 1; i >= 0; --i) {
            const ActivationEvent& ev = truth[static_cast<size_t>(i)];
            if (consumed[static_cast<size_t>(i)] || ev.bank != inf.bank || ev.row != inf.row)
                continue;
            if (ev.cycle > inf.window_begin && ev.cycle <= inf.window_end) {
                best = i;
                break;
            }
        }
        if (best >= 0) {
            consumed[static_cast<size_t>(best)] = true;
            ++res.correct_inferences;
            ++matched_truth;
        }
    }
    res.error_rate = res.inference_count == 0
                         ? 0.0
                         : static_cast<double>(res.inference_count - res.correct_inferences) /
                               static_cast<double>(res.inference_count);
    res.identification_accuracy =
        res.truth_activations == 0
            ? 1.0
            : static_cast<double>(matched_truth) / static_cast<double>(res.truth_activations);
    if (total_cycles > 0)
        res.throughput_mbps = static_cast<double>(res.correct_inferences) *
                              res.bits_per_identification * clock_ghz * 1000.0 /
                              static_cast<double>(total_cycles);
    return res;
}

SideChannelSim::SideChannelSim(const SideChannelSpec& spec)
    : spec_(spec), dram_(spec.dram), pim_(dram_, spec.pim) {
    spec_.victim.validate();
    const int entries_per_row = spec_.dram.row_size_bytes / spec_.entry_size_bytes;
    const std::int64_t n_entries = static_cast<std::int64_t>(spec_.rows_per_bank) *
                                   spec_.dram.total_banks() * entries_per_row;
    layout_ = build_layout(n_entries, spec_.entry_size_bytes, spec_.dram);

    victim_rng_.seed(mix_seed(spec_.victim.rng_seed, 0x76696374));
    hash_basis_ = mix_seed(spec_.victim.rng_seed, 0x68617368) | 1;
    pending_.resize(static_cast<size_t>(layout_.n_banks));
    prev_probe_.assign(static_cast<size_t>(layout_.n_banks), 0);
    sentinel_cursor_.assign(static_cast<size_t>(layout_.n_banks), 0);
    candidate_cursor_.assign(static_cast<size_t>(layout_.n_banks),
                             std::vector<int>(static_cast<size_t>(layout_.rows_per_bank), 0));
    noise_.resize(static_cast<size_t>(layout_.n_banks));
    if (spec_.noise.rate_per_kilocycle > 0.0) {
        // Global Poisson rate split uniformly across banks.
        const double per_bank = spec_.noise.rate_per_kilocycle / noise_.size();
        for (size_t b = 0; b < noise_.size(); ++b) {
            noise_[b].arrivals = PoissonStream(per_bank, mix_seed(spec_.noise.seed, b * 2));
            noise_[b].rows.seed(mix_seed(spec_.noise.seed, b * 2 + 1));
        }
    }
}

void SideChannelSim::generate_victim_until(Cycle t) {
    const VictimModel& v = spec_.victim;
    const int entry_reads = layout_.entry_size_bytes / 64;
    const Cycle first_read_cost = pim_.config().offload_transit_cycles +
                                  dram_.config().conflict_latency() +
                                  pim_.config().pei_op_latency_cycles;
    const Cycle next_read_cost = pim_.config().offload_transit_cycles +
                                 dram_.config().hit_latency() +
                                 pim_.config().pei_op_latency_cycles;
    while (victim_clock_ <= t && reads_done_ < v.n_reads) {
        // One read: synthesize the sequence, hash its seeds, walk each
        // entry's lines. Pacing uses the nominal cost model; actual bank
        // state effects land when the accesses are drained in cycle order.
        std::string read(static_cast<size_t>(v.read_len), 'A');
        for (auto& c : read)
            c = kBases[victim_rng_() % 4];
        for (int s = 0; s < v.accesses_per_read; ++s) {
            const int max_pos = v.read_len - v.seed_len;
            const int pos = max_pos == 0 ? 0 : static_cast<int>(victim_rng_() % (max_pos + 1));
            const std::string seed = read.substr(static_cast<size_t>(pos),
                                                 static_cast<size_t>(v.seed_len));
            const std::int64_t entry = hash_seed_to_entry(seed, hash_basis_, layout_.n_entries);
            const HashTableLayout::Place place = layout_.place(entry);
            victim_clock_ += v.compute_cycles_per_seed;
            for (int i = 0; i < entry_reads; ++i) {
                pending_[static_cast<size_t>(place.bank)].push_back(
                    PlannedAccess{victim_clock_, place.addr + static_cast<Addr>(i) * 64});
                victim_clock_ += (i == 0 ? first_read_cost : next_read_cost);
                victim_clock_ += v.align_cycles_per_read;
            }
        }
        ++reads_done_;
    }
}

void SideChannelSim::apply_victim_access(const PlannedAccess& pa) {
    PeiRequest req{kVictimPid, pa.addr, PeiOp::Add};
    const PimCompletion done = pim_.execute_pei(req, pa.cycle);
    if (done.routed_to == PcuSite::MemoryPcu && !done.per_bank_outcomes.empty() &&
        done.per_bank_outcomes.front().kind != AccessKind::Hit) {
        const AddressParts parts = map_address(pa.addr, dram_.config());
        truth_.push_back(ActivationEvent{parts.flat_bank, parts.row, pa.cycle});
    }
}

void SideChannelSim::drain_bank(int bank, Cycle t) {
    generate_victim_until(t);
    auto& q = pending_[static_cast<size_t>(bank)];
    NoiseBankStream& nb = noise_[static_cast<size_t>(bank)];
    Cycle noise_at;
    // Interleave victim and noise arrivals in cycle order.
    while (true) {
        const bool have_victim = !q.empty() && q.front().cycle <= t;
        if (have_victim) {
            while (nb.arrivals.pop_before(std::min(t, q.front().cycle), &noise_at)) {
                MemoryAccess acc{kNoisePid, bank, kNoiseRowBase + static_cast<RowId>(nb.rows() % 4096),
                                 noise_at, Origin::Host};
                dram_.access(acc);
            }
            apply_victim_access(q.front());
            q.pop_front();
            continue;
        }
        while (nb.arrivals.pop_before(t, &noise_at)) {
            MemoryAccess acc{kNoisePid, bank, kNoiseRowBase + static_cast<RowId>(nb.rows() % 4096),
                             noise_at, Origin::Host};
            dram_.access(acc);
        }
        break;
    }
}

ProbeObservation SideChannelSim::probe_bank(int bank) {
    const RowId sentinel = layout_.rows_per_bank + 1024;
    const int lines = dram_.config().row_size_bytes / 64;
    const Addr addr = bank_row_addr(bank, sentinel, dram_.config()) +
                      static_cast<Addr>(sentinel_cursor_[static_cast<size_t>(bank)]++ % lines) * 64;
    const PimCompletion done =
        pim_.execute_pei(PeiRequest{kAttackerPid, addr, PeiOp::Add}, attacker_clock_);
    attacker_clock_ += done.latency_cycles;
    ProbeObservation obs;
    obs.bank = bank;
    obs.probed_row = sentinel;
    obs.latency_cycles = done.latency_cycles;
    obs.inferred_active = done.latency_cycles > spec_.threshold_cycles;
    return obs;
}

std::vector<ProbeObservation> SideChannelSim::attacker_round() {
    std::vector<ProbeObservation> round_obs;
    const int lines = dram_.config().row_size_bytes / 64;
    for (int b = 0; b < layout_.n_banks; ++b) {
        const Cycle window_begin = prev_probe_[static_cast<size_t>(b)];
        drain_bank(b, attacker_clock_);
        const Cycle window_end = attacker_clock_;
        ProbeObservation obs = probe_bank(b);
        round_obs.push_back(obs);
        if (obs.inferred_active) {
            RowId inferred = 0;
            if (layout_.rows_per_bank > 1) {
                // Probe candidate rows in order; a hit pins the open row,
                // otherwise elimination leaves the last candidate.
                inferred = layout_.rows_per_bank - 1;
                for (int cand = 0; cand < layout_.rows_per_bank - 1; ++cand) {
                    auto& cur = candidate_cursor_[static_cast<size_t>(b)][static_cast<size_t>(cand)];
                    const Addr caddr = bank_row_addr(b, cand, dram_.config()) +
                                       static_cast<Addr>(cur++ % lines) * 64;
                    const PimCompletion probe =
                        pim_.execute_pei(PeiRequest{kAttackerPid, caddr, PeiOp::Add}, attacker_clock_);
                    attacker_clock_ += probe.latency_cycles;
                    if (probe.latency_cycles <= spec_.threshold_cycles) {
                        inferred = cand;
                        break;
                    }
                }
                // Re-park the sentinel so the next round starts clean.
                ProbeObservation repark = probe_bank(b);
                (void)repark;
            }
            inferences_.push_back(RowInference{b, inferred, window_begin, window_end});
        }
        prev_probe_[static_cast<size_t>(b)] = window_end;
        attacker_clock_ += spec_.attacker_think_cycles;
        observations_.push_back(obs);
    }
    return round_obs;
}

std::vector<ActivationEvent> SideChannelSim::victim_round(std::int64_t n_reads) {
    const std::int64_t target = reads_done_ + n_reads;
    const std::int64_t saved_limit = spec_.victim.n_reads;
    spec_.victim.n_reads = target;
    // Generate and apply immediately: standalone victim, no interleaving.
    const std::int64_t truth_before = static_cast<std::int64_t>(truth_.size());
    while (reads_done_ < target) {
        generate_victim_until(victim_clock_);
        for (auto& q : pending_) {
            while (!q.empty()) {
                apply_victim_access(q.front());
                q.pop_front();
            }
        }
    }
    spec_.victim.n_reads = saved_limit;
    return {truth_.begin() + truth_before, truth_.end()};
}

SideChannelResult SideChannelSim::run() {
    // Attacker parks a sentinel row in every bank before measuring.
    for (int b = 0; b < layout_.n_banks; ++b) {
        probe_bank(b);
        prev_probe_[static_cast<size_t>(b)] = attacker_clock_;
    }
    victim_clock_ = attacker_clock_;
    const Cycle measure_start = attacker_clock_;
    for (int round = 0; round < spec_.rounds; ++round)
        attacker_round();
    return evaluate(truth_, inferences_, layout_, dram_.config().clock_ghz,
                    attacker_clock_ - measure_start);
}

} // namespace impact
