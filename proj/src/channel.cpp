#include "impact/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace impact {

namespace {

// Protocol row ids per bank. Receiver owns rows 1/2, sender 3/4; noise picks
// rows far outside this range.
constexpr RowId kRecvRowA = 1;
constexpr RowId kRecvRowB = 2;
constexpr RowId kSendRowS = 3;
constexpr RowId kSendRowD = 4;
constexpr RowId kNoiseRowBase = 1 << 20;

Addr row_base_addr(int bank, RowId row, const DramConfig& cfg) {
    return bank_row_addr(bank, row, cfg);
}

} // namespace

const char* to_string(ChannelKind k) {
    return k == ChannelKind::PnM ? "impact-pnm" : "impact-pum";
}

void ChannelConfig::validate(const DramConfig& dram) const {
    if (batch_size < 1 || batch_size > dram.n_banks)
        throw InvalidConfig("batch_size must lie in [1, n_banks]");
    if (threshold_cycles <= 0 || sync_cost_cycles < 0 || calibration_samples < 1)
        throw InvalidConfig("channel cycle constants must be positive");
    if (noise.rate_per_kilocycle < 0.0)
        throw InvalidConfig("noise rate must be >= 0");
}

BitVec bits_from_hex(const std::string& hex) {
    BitVec bits;
    for (char c : hex) {
        int v;
        if (c >= '0' && c <= '9')
            v = c - '0';
        else if (c >= 'a' && c <= 'f')
            v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            v = c - 'A' + 10;
        else
            throw InvalidConfig(std::string("bad hex digit '") + c + "' in message");
        for (int i = 3; i >= 0; --i)
            bits.push_back(static_cast<std::uint8_t>((v >> i) & 1));
    }
    return bits;
}

BitVec random_bits(std::int64_t n, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x62697473));
    BitVec bits(static_cast<size_t>(n));
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng() & 1);
    return bits;
}

Cycle threshold_from_samples(std::span<const Cycle> hit_samples,
                             std::span<const Cycle> conflict_samples) {
    if (hit_samples.empty() || conflict_samples.empty())
        throw CalibrationFailed("calibration needs samples from both classes");
    const auto mean = [](std::span<const Cycle> v) {
        return static_cast<double>(std::accumulate(v.begin(), v.end(), Cycle{0})) /
               static_cast<double>(v.size());
    };
    const Cycle threshold =
        static_cast<Cycle>(std::llround((mean(hit_samples) + mean(conflict_samples)) / 2.0));
    const Cycle hit_max = *std::max_element(hit_samples.begin(), hit_samples.end());
    const Cycle conf_min = *std::min_element(conflict_samples.begin(), conflict_samples.end());
    if (!(hit_max < threshold && threshold < conf_min))
        throw CalibrationFailed("hit and conflict latency classes overlap");
    return threshold;
}

CovertChannel::CovertChannel(const DramConfig& dram, const PimConfig& pim,
                             const ChannelConfig& chan)
    : dram_(dram), pim_(dram_, pim), chan_(chan) {
    chan_.validate(dram);
    noise_.resize(static_cast<size_t>(dram.total_banks()));
    if (chan_.noise.rate_per_kilocycle > 0.0) {
        // Global Poisson rate, banks drawn uniformly: independent per-bank
        // streams at rate/n each.
        const double per_bank = chan_.noise.rate_per_kilocycle / noise_.size();
        for (size_t b = 0; b < noise_.size(); ++b) {
            noise_[b].arrivals = PoissonStream(per_bank, mix_seed(chan_.noise.seed, b * 2));
            noise_[b].rows.seed(mix_seed(chan_.noise.seed, b * 2 + 1));
        }
    }
}

void CovertChannel::apply_noise(int bank, Cycle upto) {
    NoiseBank& nb = noise_[static_cast<size_t>(bank)];
    if (!nb.arrivals.active())
        return;
    Cycle at;
    while (nb.arrivals.pop_before(upto, &at)) {
        MemoryAccess acc;
        acc.process_id = -2;
        acc.bank = bank;
        acc.row = kNoiseRowBase + static_cast<RowId>(nb.rows() % 4096);
        acc.issue_cycle = at;
        acc.origin = Origin::Host;
        dram_.access(acc);
    }
}

Addr CovertChannel::line_addr(int bank, RowId row, int* cursor) const {
    const int lines_per_row = dram_.config().row_size_bytes / 64;
    const int line = (*cursor)++ % lines_per_row;
    return row_base_addr(bank, row, dram_.config()) + static_cast<Addr>(line) * 64;
}

ChannelResult CovertChannel::finish(const BitVec& message, const BitVec& decoded,
                                    Cycle window_start, Cycle window_end, Cycle sender_busy,
                                    Cycle receiver_busy) const {
    ChannelResult res;
    res.bits_sent = static_cast<std::int64_t>(message.size());
    for (size_t i = 0; i < message.size(); ++i)
        if (decoded[i] == message[i])
            ++res.bits_correct;
    res.error_rate = res.bits_sent == 0
                         ? 0.0
                         : static_cast<double>(res.bits_sent - res.bits_correct) /
                               static_cast<double>(res.bits_sent);
    res.total_cycles = window_end - window_start;
    res.sender_cycles = sender_busy;
    res.receiver_cycles = receiver_busy;
    if (res.total_cycles > 0)
        res.throughput_mbps = static_cast<double>(res.bits_correct) * dram_.config().clock_ghz *
                              1000.0 / static_cast<double>(res.total_cycles);
    return res;
}

ChannelResult CovertChannel::transmit(ChannelKind kind, const BitVec& message) {
    probes_.clear();
    if (message.empty())
        throw InvalidConfig("message must be non-empty");
    return kind == ChannelKind::PnM ? pnm_transmit(message) : pum_transmit(message);
}

ChannelResult CovertChannel::pnm_transmit(const BitVec& message) {
    const DramConfig& dc = dram_.config();
    const int n = dc.n_banks;
    const Cycle sync = chan_.sync_cost_cycles;

    BitVec padded = message;
    while (padded.size() % static_cast<size_t>(n) != 0)
        padded.push_back(0);
    const int turns = static_cast<int>(padded.size()) / n;

    std::vector<int> send_cursor(static_cast<size_t>(n), 0);
    std::vector<int> recv_cursor(static_cast<size_t>(n), 0);

    Cycle s = 0, r = 0;
    Cycle sender_busy = 0, receiver_busy = 0;

    // Receiver pre-initializes one known row per bank with PEIs.
    for (int b = 0; b < n; ++b) {
        PeiRequest req{kReceiverPid, line_addr(b, kRecvRowA, &recv_cursor[b]), PeiOp::Add};
        r += pim_.execute_pei(req, r).latency_cycles;
    }
    s = r = barrier(s, r, sync);

    SimSemaphore batches_ready;
    SimSemaphore turn_ready;
    BitVec decoded(padded.size(), 0);
    Cycle window_start = -1;
    Cycle last_decode = r;

    for (int turn = 0; turn < turns; ++turn) {
        if (turn > 0)
            s = turn_ready.wait(s); // re-init must land before this turn's sends

        // Sender: PEI per 1-bit, NOP per 0-bit, semaphore post per batch.
        for (int base = 0; base < n; base += chan_.batch_size) {
            const int batch_end = std::min(base + chan_.batch_size, n);
            for (int b = base; b < batch_end; ++b) {
                const std::uint8_t bit = padded[static_cast<size_t>(turn) * n + b];
                if (window_start < 0)
                    window_start = s;
                if (bit == 1) {
                    apply_noise(b, s);
                    PeiRequest req{kSenderPid, line_addr(b, kSendRowS, &send_cursor[b]), PeiOp::Add};
                    const Cycle lat = pim_.execute_pei(req, s).latency_cycles;
                    s += lat;
                    sender_busy += lat;
                } else {
                    s += pim_.execute_pei(PeiRequest{kSenderPid, 0, PeiOp::Nop}, s).latency_cycles;
                }
            }
            s += sync; // memory fence + semaphore increment
            sender_busy += sync;
            batches_ready.post(s);
        }

        // Receiver: block per batch, timed re-probe of the init row per bank.
        for (int base = 0; base < n; base += chan_.batch_size) {
            r = batches_ready.wait(r);
            const int batch_end = std::min(base + chan_.batch_size, n);
            for (int b = base; b < batch_end; ++b) {
                apply_noise(b, r);
                PeiRequest req{kReceiverPid, line_addr(b, kRecvRowA, &recv_cursor[b]), PeiOp::Add};
                const Cycle lat = pim_.execute_pei(req, r).latency_cycles;
                r += lat;
                receiver_busy += lat;
                const int bit = lat > chan_.threshold_cycles ? 1 : 0;
                decoded[static_cast<size_t>(turn) * n + b] = static_cast<std::uint8_t>(bit);
                probes_.push_back(ProbeRecord{turn, b, lat, bit,
                                              padded[static_cast<size_t>(turn) * n + b]});
                last_decode = r;
            }
        }

        // Re-initialize interfered banks, then hand the turn back.
        if (turn + 1 < turns) {
            for (int b = 0; b < n; ++b) {
                if (decoded[static_cast<size_t>(turn) * n + b] == 0)
                    continue; // init row still open in this bank
                apply_noise(b, r);
                PeiRequest req{kReceiverPid, line_addr(b, kRecvRowA, &recv_cursor[b]), PeiOp::Add};
                const Cycle lat = pim_.execute_pei(req, r).latency_cycles;
                r += lat;
                receiver_busy += lat;
            }
            r += sync;
            receiver_busy += sync;
            turn_ready.post(r);
        }
    }

    decoded.resize(message.size());
    return finish(message, decoded, window_start, last_decode, sender_busy, receiver_busy);
}

ChannelResult CovertChannel::pum_transmit(const BitVec& message) {
    const DramConfig& dc = dram_.config();
    const int n = dc.n_banks;
    if (n > 64)
        throw InvalidConfig("rowclone mask supports at most 64 banks");
    const Cycle sync = chan_.sync_cost_cycles;

    BitVec padded = message;
    while (padded.size() % static_cast<size_t>(n) != 0)
        padded.push_back(0);
    const int turns = static_cast<int>(padded.size()) / n;
    const std::uint64_t full_mask = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);

    Cycle s = 0, r = 0;
    Cycle sender_busy = 0, receiver_busy = 0;

    // Receiver initializes every bank with one full-mask RowClone.
    {
        RowCloneRequest init{kReceiverPid, row_base_addr(0, kRecvRowA, dc),
                             row_base_addr(0, kRecvRowB, dc), full_mask};
        r += pim_.execute_rowclone(init, r).latency_cycles;
    }
    RowId recv_src = kRecvRowB; // last clone left B open; alternate each sweep
    RowId recv_dst = kRecvRowA;

    BitVec decoded(padded.size(), 0);
    Cycle window_start = -1;
    Cycle last_decode = r;

    for (int turn = 0; turn < turns; ++turn) {
        s = r = barrier(s, r, sync);
        sender_busy += sync;
        receiver_busy += sync;

        std::uint64_t mask = 0;
        for (int b = 0; b < n; ++b)
            mask |= static_cast<std::uint64_t>(padded[static_cast<size_t>(turn) * n + b]) << b;

        if (window_start < 0)
            window_start = s;
        if (mask != 0) {
            for (int b = 0; b < n; ++b)
                if (mask >> b & 1)
                    apply_noise(b, s);
            RowCloneRequest req{kSenderPid, row_base_addr(0, kSendRowS, dc),
                                row_base_addr(0, kSendRowD, dc), mask};
            const Cycle lat = pim_.execute_rowclone(req, s).latency_cycles;
            s += lat;
            sender_busy += lat;
        }

        s = r = barrier(s, r, sync);
        sender_busy += sync;
        receiver_busy += sync;

        // Receiver times one single-bank RowClone per bank.
        for (int b = 0; b < n; ++b) {
            apply_noise(b, r);
            RowCloneRequest probe{kReceiverPid, row_base_addr(0, recv_src, dc),
                                  row_base_addr(0, recv_dst, dc), std::uint64_t{1} << b};
            const Cycle lat = pim_.execute_rowclone(probe, r).latency_cycles;
            r += lat;
            receiver_busy += lat;
            const int bit = lat > chan_.threshold_cycles ? 1 : 0;
            decoded[static_cast<size_t>(turn) * n + b] = static_cast<std::uint8_t>(bit);
            probes_.push_back(ProbeRecord{turn, b, lat, bit,
                                          padded[static_cast<size_t>(turn) * n + b]});
            last_decode = r;
        }
        std::swap(recv_src, recv_dst);
    }

    decoded.resize(message.size());
    return finish(message, decoded, window_start, last_decode, sender_busy, receiver_busy);
}

Cycle CovertChannel::calibrate_threshold() const {
    // Fresh quiescent instance so calibration never disturbs a live run.
    DramSystem dram(dram_.config());
    PimEngine pim(dram, pim_.config());
    const int n = dram.config().n_banks;

    std::vector<Cycle> hits, conflicts;
    std::vector<int> cursor_a(static_cast<size_t>(n), 0);
    std::vector<int> cursor_b(static_cast<size_t>(n), 0);
    Cycle t = 0;
    for (int i = 0; i < chan_.calibration_samples; ++i) {
        const int b = i % n;
        Addr row_a = row_base_addr(b, kRecvRowA, dram.config());
        Addr row_b = row_base_addr(b, kRecvRowB, dram.config());
        // Open row A, time a re-probe (hit), then time a probe of row B
        // while A is open (conflict).
        t += pim.execute_pei(PeiRequest{kReceiverPid, row_a + 64 * (cursor_a[b]++), PeiOp::Add}, t)
                 .latency_cycles;
        const Cycle hit =
            pim.execute_pei(PeiRequest{kReceiverPid, row_a + 64 * (cursor_a[b]++), PeiOp::Add}, t)
                .latency_cycles;
        t += hit;
        const Cycle conflict =
            pim.execute_pei(PeiRequest{kReceiverPid, row_b + 64 * (cursor_b[b]++), PeiOp::Add}, t)
                .latency_cycles;
        t += conflict;
        hits.push_back(hit);
        conflicts.push_back(conflict);
    }
    return threshold_from_samples(hits, conflicts);
}

ChannelResult run_channel(const ChannelRunSpec& spec) {
    DramConfig dram = spec.dram;
    dram.row_policy = spec.policy;
    if (spec.partition) {
        std::map<ProcessId, std::set<int>> parts;
        for (int b = 0; b < dram.n_banks; ++b)
            (b < dram.n_banks / 2 ? parts[kSenderPid] : parts[kReceiverPid]).insert(b);
        dram.partition_map = parts;
    }
    CovertChannel channel(dram, spec.pim, spec.channel);
    return channel.transmit(spec.kind, spec.message);
}

} // namespace impact
