#include "impact/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "impact/csv.hpp"
#include "impact/parallel.hpp"
#include "impact/sync.hpp"

namespace impact {

namespace {

const std::vector<int> kSizeSweep = {8, 16, 32, 64, 128};
const std::vector<int> kWaySweep = {2, 4, 8, 16, 32, 64, 128};

BitVec experiment_message(const ExperimentSpec& spec, std::int64_t default_random_bits,
                          const std::string& default_hex) {
    if (spec.message_hex)
        return bits_from_hex(*spec.message_hex);
    if (spec.random_bits > 0)
        return random_bits(spec.random_bits, spec.seed);
    if (default_random_bits > 0)
        return random_bits(default_random_bits, spec.seed);
    return bits_from_hex(default_hex);
}

ChannelRunSpec base_channel_spec(const HarnessConfig& cfg, const ExperimentSpec& spec,
                                 ChannelKind kind) {
    ChannelRunSpec run;
    run.kind = kind;
    run.policy = spec.policy_override.value_or(cfg.dram.row_policy);
    run.partition = spec.partition;
    run.dram = cfg.dram;
    run.pim = cfg.pim;
    run.channel = cfg.channel;
    run.channel.noise.seed = mix_seed(spec.seed, 0x6e6f6973);
    return run;
}

// ---------------------------------------------------------------------------
// poc-pnm / poc-pum: per-bank receiver latencies for one 16-bit message.

ExperimentOutput poc_experiment(const ExperimentSpec& spec, const HarnessConfig& cfg,
                                ChannelKind kind) {
    ChannelRunSpec run = base_channel_spec(cfg, spec, kind);
    run.message = experiment_message(spec, 0, "A5A5");

    CovertChannel channel = [&] {
        DramConfig dram = run.dram;
        dram.row_policy = run.policy;
        return CovertChannel(dram, run.pim, run.channel);
    }();
    const ChannelResult res = channel.transmit(kind, run.message);

    CsvTable table({"turn", "bank", "latency_cycles", "decoded_bit", "sent_bit"});
    for (const ProbeRecord& p : channel.probes())
        table.row({csv_num(p.turn), csv_num(p.bank), csv_num(p.latency_cycles),
                   csv_num(p.decoded_bit), csv_num(p.sent_bit)});

    std::ostringstream sum;
    sum << "Receiver-side probe latencies, one row per (turn, bank).\n"
        << "channel: " << to_string(kind) << "\n"
        << "message bits: " << res.bits_sent << "\n"
        << "decode threshold: " << run.channel.threshold_cycles << " cycles\n"
        << "bit errors: " << (res.bits_sent - res.bits_correct) << "\n"
        << "error rate: " << csv_num(res.error_rate) << "\n"
        << "throughput: " << csv_num(res.throughput_mbps) << " Mb/s\n";
    return {table.str(), sum.str()};
}

// ---------------------------------------------------------------------------
// latency-gap: probe-measured latency classes and the conflict-hit gap.

ExperimentOutput latency_gap_experiment(const ExperimentSpec&, const HarnessConfig& cfg) {
    const LatencyClasses cls = probe_latency_classes(cfg);
    const Cycle raw_term = cfg.dram.trp_cycles() + cfg.dram.trcd_cycles();

    CsvTable table({"class", "probe_latency_cycles"});
    table.row({"hit", csv_num(cls.hit)});
    table.row({"empty", csv_num(cls.empty)});
    table.row({"conflict", csv_num(cls.conflict)});

    std::ostringstream sum;
    sum << "Row-buffer latency classes as measured by timed PEI probes.\n"
        << "hit: " << cls.hit << " cycles\n"
        << "empty: " << cls.empty << " cycles\n"
        << "conflict: " << cls.conflict << " cycles\n"
        << "conflict-hit gap: " << (cls.conflict - cls.hit) << " cycles\n"
        << "precharge+activate model term: " << raw_term << " cycles\n";
    return {table.str(), sum.str()};
}

// ---------------------------------------------------------------------------
// throughput-sweep: analytic baselines across LLC sizes/ways plus the
// simulated channels (constant across cache configurations).

ExperimentOutput throughput_sweep_experiment(const ExperimentSpec& spec,
                                             const HarnessConfig& cfg) {
    const std::vector<AttackKind> kinds = {
        AttackKind::DirectAccess, AttackKind::DramaClflush, AttackKind::DramaEviction,
        AttackKind::Streamline,   AttackKind::DmaEngine,    AttackKind::PnmOffChip,
    };

    struct Point {
        int size;
        int ways;
    };
    std::vector<Point> points;
    for (int size : kSizeSweep)
        points.push_back({size, cfg.cache.llc_ways});
    for (int ways : kWaySweep)
        points.push_back({16, ways});

    // Simulated channels and the analytic grid are independent tasks.
    ChannelResult pnm, pum;
    std::vector<std::vector<SweepRow>> grid(points.size());
    for_each_index(static_cast<std::int64_t>(points.size()) + 2, spec.parallel,
                   [&](std::int64_t i) {
                       if (i == static_cast<std::int64_t>(points.size())) {
                           pnm = run_throughput_channel(cfg, ChannelKind::PnM, 4096, spec.seed);
                           return;
                       }
                       if (i == static_cast<std::int64_t>(points.size()) + 1) {
                           pum = run_throughput_channel(cfg, ChannelKind::PuM, 4096, spec.seed);
                           return;
                       }
                       const Point& pt = points[static_cast<size_t>(i)];
                       grid[static_cast<size_t>(i)] =
                           sweep(kinds, {pt.size}, {pt.ways}, cfg.cache, cfg.analytic,
                                 cfg.dram.clock_ghz);
                   });

    CsvTable table({"kind", "llc_size_mb", "llc_ways", "bit_cost_cycles", "throughput_mbps"});
    const auto impact_row = [&](const char* name, const ChannelResult& res, const Point& pt) {
        const Cycle per_bit = res.bits_correct > 0 ? res.total_cycles / res.bits_correct : 0;
        table.row({name, csv_num(pt.size), csv_num(pt.ways), csv_num(per_bit),
                   csv_num(res.throughput_mbps)});
    };
    for (size_t i = 0; i < points.size(); ++i) {
        for (const SweepRow& r : grid[i])
            table.row({to_string(r.kind), csv_num(r.llc_size_mb), csv_num(r.llc_ways),
                       csv_num(r.bit_cost_cycles), csv_num(r.throughput_mbps)});
        impact_row("impact-pnm", pnm, points[i]);
        impact_row("impact-pum", pum, points[i]);
    }

    std::ostringstream sum;
    sum << "Covert-channel throughput across LLC sizes (ways fixed) and ways\n"
        << "(16 MB fixed); direct-memory attacks are cache-independent.\n"
        << "impact-pnm: " << csv_num(pnm.throughput_mbps) << " Mb/s\n"
        << "impact-pum: " << csv_num(pum.throughput_mbps) << " Mb/s\n"
        << "pum/pnm ratio: " << csv_num(pum.throughput_mbps / pnm.throughput_mbps) << "\n";
    return {table.str(), sum.str()};
}

// ---------------------------------------------------------------------------
// sender-breakdown: sender vs receiver cycles for a 16-bit message.

ExperimentOutput sender_breakdown_experiment(const ExperimentSpec& spec,
                                             const HarnessConfig& cfg) {
    ExperimentSpec full = spec;
    if (!full.message_hex && full.random_bits == 0)
        full.message_hex = "FFFF"; // all banks interfered: the parallelism case

    ChannelRunSpec pnm_spec = base_channel_spec(cfg, full, ChannelKind::PnM);
    pnm_spec.message = experiment_message(full, 0, "FFFF");
    ChannelRunSpec pum_spec = pnm_spec;
    pum_spec.kind = ChannelKind::PuM;

    const ChannelResult pnm = run_channel(pnm_spec);
    const ChannelResult pum = run_channel(pum_spec);

    CsvTable table({"kind", "role", "cycles"});
    table.row({"impact-pnm", "sender", csv_num(pnm.sender_cycles)});
    table.row({"impact-pnm", "receiver", csv_num(pnm.receiver_cycles)});
    table.row({"impact-pum", "sender", csv_num(pum.sender_cycles)});
    table.row({"impact-pum", "receiver", csv_num(pum.receiver_cycles)});

    std::ostringstream sum;
    sum << "Active cycles spent by each side transmitting one 16-bit message.\n"
        << "pnm sender/pum sender ratio: "
        << csv_num(static_cast<double>(pnm.sender_cycles) /
                   static_cast<double>(pum.sender_cycles))
        << "\n";
    return {table.str(), sum.str()};
}

// ---------------------------------------------------------------------------
// side-channel-sweep: leakage throughput/error/accuracy across bank counts.

SideChannelSpec side_channel_spec(const HarnessConfig& cfg, int n_banks,
                                  std::uint64_t seed) {
    SideChannelSpec spec;
    spec.dram = cfg.dram;
    spec.dram.n_banks = n_banks;
    spec.dram.n_ranks = 1;
    spec.dram.n_channels = 1;
    spec.pim = cfg.pim;
    const int base_banks = cfg.sidechannel.bank_sweep.empty() ? n_banks
                                                              : cfg.sidechannel.bank_sweep.front();
    // Table capacity is constant across the sweep: entries grow with bank
    // count, so entries per row shrink and each hit pins fewer candidates.
    spec.entry_size_bytes = cfg.sidechannel.entry_size_bytes * (n_banks / base_banks);
    spec.rows_per_bank = cfg.sidechannel.rows_per_bank;
    spec.threshold_cycles = cfg.channel.threshold_cycles;
    spec.attacker_think_cycles = cfg.sidechannel.attacker_think_cycles;
    spec.noise = NoiseModel{cfg.sidechannel.noise_rate_per_kilocycle, mix_seed(seed, 0x736e6f)};
    spec.rounds = cfg.sidechannel.rounds;
    spec.victim.read_len = cfg.sidechannel.read_len;
    spec.victim.seed_len = cfg.sidechannel.seed_len;
    spec.victim.accesses_per_read = cfg.sidechannel.accesses_per_read;
    spec.victim.rng_seed = mix_seed(seed, 0x72656164);
    spec.victim.compute_cycles_per_seed = cfg.sidechannel.victim_compute_cycles_per_seed;
    spec.victim.align_cycles_per_read = cfg.sidechannel.victim_align_cycles_per_read;
    return spec;
}

ExperimentOutput side_channel_sweep_experiment(const ExperimentSpec& spec,
                                               const HarnessConfig& cfg) {
    const std::vector<int>& banks = cfg.sidechannel.bank_sweep;
    std::vector<SideChannelResult> results(banks.size());
    std::vector<int> entries_per_row(banks.size());
    for_each_index(static_cast<std::int64_t>(banks.size()), spec.parallel, [&](std::int64_t i) {
        SideChannelSpec point = side_channel_spec(cfg, banks[static_cast<size_t>(i)], spec.seed);
        SideChannelSim sim(point);
        results[static_cast<size_t>(i)] = sim.run();
        entries_per_row[static_cast<size_t>(i)] = sim.layout().entries_per_row;
    });

    CsvTable table({"n_banks", "entries_per_row", "throughput_mbps", "error_rate", "accuracy",
                    "total_cycles"});
    for (size_t i = 0; i < banks.size(); ++i) {
        const SideChannelResult& r = results[i];
        table.row({csv_num(banks[i]), csv_num(entries_per_row[i]), csv_num(r.throughput_mbps),
                   csv_num(r.error_rate), csv_num(r.identification_accuracy),
                   csv_num(r.total_cycles)});
    }

    std::ostringstream sum;
    sum << "Read-mapping side channel across PiM bank counts: leakage\n"
        << "throughput, wrong-identification rate, and per-row accuracy.\n";
    for (size_t i = 0; i < banks.size(); ++i)
        sum << banks[i] << " banks: " << csv_num(results[i].throughput_mbps) << " Mb/s, error "
            << csv_num(results[i].error_rate) << ", accuracy "
            << csv_num(results[i].identification_accuracy) << "\n";
    return {table.str(), sum.str()};
}

// ---------------------------------------------------------------------------
// mitigation-overhead: CRP/CTD slowdown against the open-row baseline.

ExperimentOutput mitigation_overhead_experiment(const ExperimentSpec& spec,
                                                const HarnessConfig& cfg) {
    std::vector<OverheadReport> parts(cfg.profiles.size());
    for_each_index(static_cast<std::int64_t>(cfg.profiles.size()), spec.parallel,
                   [&](std::int64_t i) {
                       parts[static_cast<size_t>(i)] = overhead_report(
                           {cfg.profiles[static_cast<size_t>(i)]}, cfg.dram,
                           cfg.profile_think_cycles);
                   });
    OverheadReport report;
    double crp_sum = 0.0, ctd_sum = 0.0;
    for (const OverheadReport& part : parts) {
        report.profiles.push_back(part.profiles.front());
        crp_sum += part.profiles.front().crp_overhead_pct;
        ctd_sum += part.profiles.front().ctd_overhead_pct;
    }
    report.mean_crp_overhead_pct = crp_sum / static_cast<double>(parts.size());
    report.mean_ctd_overhead_pct = ctd_sum / static_cast<double>(parts.size());

    CsvTable table({"profile", "policy", "total_cycles", "overhead_pct"});
    for (const ProfileOverhead& p : report.profiles) {
        table.row({p.name, "open", csv_num(p.baseline_cycles), csv_num(0.0)});
        table.row({p.name, "closed", csv_num(p.crp_cycles), csv_num(p.crp_overhead_pct)});
        table.row({p.name, "constant", csv_num(p.ctd_cycles), csv_num(p.ctd_overhead_pct)});
    }

    std::ostringstream sum;
    sum << "Closed-row and constant-time policy slowdown over the open-row\n"
        << "baseline for the five locality profiles (two cores per profile).\n"
        << "mean closed-row overhead: " << csv_num(report.mean_crp_overhead_pct) << "%\n"
        << "mean constant-time overhead: " << csv_num(report.mean_ctd_overhead_pct) << "%\n";
    return {table.str(), sum.str()};
}

// ---------------------------------------------------------------------------
// mitigation-channel: residual channel under each mitigation policy.

ExperimentOutput mitigation_channel_experiment(const ExperimentSpec& spec,
                                               const HarnessConfig& cfg) {
    const std::int64_t bits = spec.random_bits > 0 ? spec.random_bits : 1024;
    CsvTable table({"kind", "policy", "n_banks", "bits", "errors", "error_rate", "total_cycles",
                    "throughput_mbps", "sender_cycles", "receiver_cycles", "outcome"});

    std::ostringstream sum;
    sum << "Covert-channel behavior under each mitigation policy.\n";

    for (ChannelKind kind : {ChannelKind::PnM, ChannelKind::PuM}) {
        for (RowPolicy policy :
             {RowPolicy::OpenTimeout, RowPolicy::ClosedRow, RowPolicy::ConstantTime}) {
            ExperimentSpec sub = spec;
            sub.policy_override = policy;
            ChannelRunSpec run = base_channel_spec(cfg, sub, kind);
            run.message = random_bits(bits, mix_seed(spec.seed, static_cast<int>(kind) * 4 +
                                                                    static_cast<int>(policy)));
            const ChannelResult res = run_channel(run);
            table.row({to_string(kind), to_string(policy), csv_num(cfg.dram.n_banks),
                       csv_num(res.bits_sent), csv_num(res.bits_sent - res.bits_correct),
                       csv_num(res.error_rate), csv_num(res.total_cycles),
                       csv_num(res.throughput_mbps), csv_num(res.sender_cycles),
                       csv_num(res.receiver_cycles), "ok"});
            sum << to_string(kind) << " under " << to_string(policy)
                << ": error rate " << csv_num(res.error_rate) << "\n";
        }
        // MPR: disjoint bank halves; the transmission must be refused.
        ExperimentSpec sub = spec;
        sub.partition = true;
        ChannelRunSpec run = base_channel_spec(cfg, sub, kind);
        run.message = random_bits(bits, mix_seed(spec.seed, 0x6d7072));
        std::string outcome = "ok";
        try {
            run_channel(run);
        } catch (const PartitionViolation&) {
            outcome = "partition-violation";
        }
        table.row({to_string(kind), "partition", csv_num(cfg.dram.n_banks), csv_num(bits),
                   csv_num(0), csv_num(0.0), csv_num(0), csv_num(0.0), csv_num(0), csv_num(0),
                   outcome});
        sum << to_string(kind) << " under partition: " << outcome << "\n";
    }

    // Threshold calibration collapses when timing is flattened.
    for (RowPolicy policy : {RowPolicy::ConstantTime, RowPolicy::ClosedRow}) {
        DramConfig dram = cfg.dram;
        dram.row_policy = policy;
        CovertChannel probe(dram, cfg.pim, cfg.channel);
        try {
            probe.calibrate_threshold();
            sum << "calibration under " << to_string(policy) << ": threshold found\n";
        } catch (const CalibrationFailed&) {
            sum << "calibration under " << to_string(policy) << ": calibration-failed\n";
        }
    }
    return {table.str(), sum.str()};
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "poc-pnm",         "poc-pum",          "latency-gap",
        "throughput-sweep", "sender-breakdown", "side-channel-sweep",
        "mitigation-overhead", "mitigation-channel",
    };
    return names;
}

LatencyClasses probe_latency_classes(const HarnessConfig& cfg) {
    DramSystem dram(cfg.dram);
    PimEngine pim(dram, cfg.pim);
    // Cold bank probe (empty), re-probe of the same row (hit), then a probe
    // of a different row while the first stays open (conflict).
    Cycle t = 0;
    const Addr row_a = bank_row_addr(0, 1, cfg.dram);
    const Addr row_b = bank_row_addr(0, 2, cfg.dram);
    LatencyClasses cls{};
    cls.empty = pim.execute_pei(PeiRequest{kReceiverPid, row_a, PeiOp::Add}, t).latency_cycles;
    t += cls.empty;
    cls.hit = pim.execute_pei(PeiRequest{kReceiverPid, row_a + 64, PeiOp::Add}, t).latency_cycles;
    t += cls.hit;
    cls.conflict =
        pim.execute_pei(PeiRequest{kReceiverPid, row_b, PeiOp::Add}, t).latency_cycles;
    return cls;
}

ChannelResult run_throughput_channel(const HarnessConfig& cfg, ChannelKind kind,
                                     std::int64_t bits, std::uint64_t seed) {
    ChannelRunSpec run;
    run.kind = kind;
    run.policy = cfg.dram.row_policy;
    run.dram = cfg.dram;
    run.pim = cfg.pim;
    run.channel = cfg.channel;
    run.channel.noise.seed = mix_seed(seed, 0x6e6f6973);
    run.message = random_bits(bits, seed);
    return run_channel(run);
}

ExperimentOutput build_experiment(const ExperimentSpec& spec, const HarnessConfig& cfg) {
    if (spec.name == "poc-pnm")
        return poc_experiment(spec, cfg, ChannelKind::PnM);
    if (spec.name == "poc-pum")
        return poc_experiment(spec, cfg, ChannelKind::PuM);
    if (spec.name == "latency-gap")
        return latency_gap_experiment(spec, cfg);
    if (spec.name == "throughput-sweep")
        return throughput_sweep_experiment(spec, cfg);
    if (spec.name == "sender-breakdown")
        return sender_breakdown_experiment(spec, cfg);
    if (spec.name == "side-channel-sweep")
        return side_channel_sweep_experiment(spec, cfg);
    if (spec.name == "mitigation-overhead")
        return mitigation_overhead_experiment(spec, cfg);
    if (spec.name == "mitigation-channel")
        return mitigation_channel_experiment(spec, cfg);
    throw InvalidConfig("unknown experiment: " + spec.name);
}

int run_experiment(const ExperimentSpec& spec) {
    const HarnessConfig cfg =
        spec.config_path.empty() ? HarnessConfig{} : parse_config(spec.config_path);
    cfg.validate();
    const ExperimentOutput out = build_experiment(spec, cfg);

    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);
    const fs::path csv_path = fs::path(spec.out_dir) / (spec.name + ".csv");
    const fs::path sum_path = fs::path(spec.out_dir) / (spec.name + ".summary.txt");
    std::ofstream csv(csv_path, std::ios::binary);
    std::ofstream sum(sum_path, std::ios::binary);
    if (!csv || !sum)
        throw SimError("cannot write outputs under " + spec.out_dir);
    csv << out.csv;
    sum << out.summary;
    return 0;
}

} // namespace impact
