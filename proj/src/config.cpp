#include "impact/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace impact {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct KeyValue {
    std::string section;
    std::string key;
    std::string value;
    int line;
};

std::vector<KeyValue> lex_ini(const std::string& text) {
    std::vector<KeyValue> out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigParseError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("line " + std::to_string(lineno) + ": expected key=value");
        if (section.empty())
            throw ConfigParseError("line " + std::to_string(lineno) + ": key outside any section");
        out.push_back(KeyValue{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno});
    }
    return out;
}

[[noreturn]] void fail(const KeyValue& kv, const std::string& why) {
    throw ConfigParseError("line " + std::to_string(kv.line) + ": [" + kv.section + "] " + kv.key +
                           ": " + why);
}

double parse_real(const KeyValue& kv) {
    try {
        size_t used = 0;
        const double v = std::stod(kv.value, &used);
        if (used != kv.value.size())
            fail(kv, "trailing characters in number '" + kv.value + "'");
        return v;
    } catch (const ConfigParseError&) {
        throw;
    } catch (const std::exception&) {
        fail(kv, "not a number: '" + kv.value + "'");
    }
}

std::int64_t parse_int(const KeyValue& kv) {
    std::int64_t v = 0;
    const auto* first = kv.value.data();
    const auto* last = first + kv.value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        fail(kv, "not an integer: '" + kv.value + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

RowPolicy parse_policy(const KeyValue& kv) {
    if (kv.value == "open")
        return RowPolicy::OpenTimeout;
    if (kv.value == "closed")
        return RowPolicy::ClosedRow;
    if (kv.value == "constant" || kv.value == "constant_time")
        return RowPolicy::ConstantTime;
    fail(kv, "row_policy must be open|closed|constant");
}

void apply_dram(HarnessConfig& cfg, const KeyValue& kv) {
    DramConfig& d = cfg.dram;
    if (kv.key == "t_rcd_ns") d.t_rcd_ns = parse_real(kv);
    else if (kv.key == "t_rp_ns") d.t_rp_ns = parse_real(kv);
    else if (kv.key == "t_ras_ns") d.t_ras_ns = parse_real(kv);
    else if (kv.key == "clock_ghz") d.clock_ghz = parse_real(kv);
    else if (kv.key == "n_banks") d.n_banks = static_cast<int>(parse_int(kv));
    else if (kv.key == "n_ranks") d.n_ranks = static_cast<int>(parse_int(kv));
    else if (kv.key == "n_channels") d.n_channels = static_cast<int>(parse_int(kv));
    else if (kv.key == "row_size_bytes") d.row_size_bytes = static_cast<int>(parse_int(kv));
    else if (kv.key == "row_policy") d.row_policy = parse_policy(kv);
    else if (kv.key == "row_timeout_ns") d.row_timeout_ns = parse_real(kv);
    else if (kv.key == "column_access_cycles") d.column_access_cycles = static_cast<int>(parse_int(kv));
    else if (kv.key == "controller_overhead_cycles") d.controller_overhead_cycles = static_cast<int>(parse_int(kv));
    else fail(kv, "unknown key");
}

void apply_cache(HarnessConfig& cfg, const KeyValue& kv) {
    CacheConfig& c = cfg.cache;
    AnalyticParams& a = cfg.analytic;
    if (kv.key == "llc_size_mb") c.llc_size_mb = static_cast<int>(parse_int(kv));
    else if (kv.key == "llc_ways") c.llc_ways = static_cast<int>(parse_int(kv));
    else if (kv.key == "mem_miss_cycles") c.mem_miss_cycles = parse_int(kv);
    else if (kv.key == "llc_lookup_table") {
        std::map<int, Cycle> table;
        for (const std::string& item : split(kv.value, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                fail(kv, "expected size:cycles pairs");
            try {
                table[std::stoi(item.substr(0, colon))] = std::stoll(item.substr(colon + 1));
            } catch (const std::exception&) {
                fail(kv, "bad size:cycles pair '" + item + "'");
            }
        }
        c.llc_lookup_table = std::move(table);
    }
    else if (kv.key == "dram_bit_cost_cycles") a.dram_bit_cost_cycles = parse_int(kv);
    else if (kv.key == "dma_os_overhead_cycles") a.dma_os_overhead_cycles = parse_int(kv);
    else if (kv.key == "offchip_base_cycles") a.offchip_base_cycles = parse_int(kv);
    else if (kv.key == "offchip_host_cycles") a.offchip_host_cycles = parse_int(kv);
    else if (kv.key == "offchip_cache_prob_max") a.offchip_cache_prob_max = parse_real(kv);
    else if (kv.key == "streamline_base_cycles") a.streamline_base_cycles = parse_int(kv);
    else if (kv.key == "streamline_lookup_roundtrips") a.streamline_lookup_roundtrips = static_cast<int>(parse_int(kv));
    else fail(kv, "unknown key");
}

void apply_pim(HarnessConfig& cfg, const KeyValue& kv) {
    PimConfig& p = cfg.pim;
    if (kv.key == "pei_op_latency_cycles") p.pei_op_latency_cycles = static_cast<int>(parse_int(kv));
    else if (kv.key == "offload_transit_cycles") p.offload_transit_cycles = parse_int(kv);
    else if (kv.key == "rowclone_issue_overhead_cycles") p.rowclone_issue_overhead_cycles = parse_int(kv);
    else if (kv.key == "pmu_capacity") p.pmu_capacity = static_cast<int>(parse_int(kv));
    else if (kv.key == "pmu_routing_threshold") p.pmu_routing_threshold = static_cast<int>(parse_int(kv));
    else if (kv.key == "host_pei_cycles") p.host_pei_cycles = parse_int(kv);
    else fail(kv, "unknown key");
}

void apply_channel(HarnessConfig& cfg, const KeyValue& kv) {
    ChannelConfig& c = cfg.channel;
    if (kv.key == "batch_size") c.batch_size = static_cast<int>(parse_int(kv));
    else if (kv.key == "threshold_cycles") c.threshold_cycles = parse_int(kv);
    else if (kv.key == "sync_cost_cycles") c.sync_cost_cycles = parse_int(kv);
    else if (kv.key == "noise_rate_per_kilocycle") c.noise.rate_per_kilocycle = parse_real(kv);
    else if (kv.key == "calibration_samples") c.calibration_samples = static_cast<int>(parse_int(kv));
    else fail(kv, "unknown key");
}

void apply_sidechannel(HarnessConfig& cfg, const KeyValue& kv) {
    SideChannelConfig& s = cfg.sidechannel;
    if (kv.key == "entry_size_bytes") s.entry_size_bytes = static_cast<int>(parse_int(kv));
    else if (kv.key == "rows_per_bank") s.rows_per_bank = static_cast<int>(parse_int(kv));
    else if (kv.key == "rounds") s.rounds = static_cast<int>(parse_int(kv));
    else if (kv.key == "attacker_think_cycles") s.attacker_think_cycles = parse_int(kv);
    else if (kv.key == "noise_rate_per_kilocycle") s.noise_rate_per_kilocycle = parse_real(kv);
    else if (kv.key == "victim_compute_cycles_per_seed") s.victim_compute_cycles_per_seed = parse_int(kv);
    else if (kv.key == "victim_align_cycles_per_read") s.victim_align_cycles_per_read = parse_int(kv);
    else if (kv.key == "accesses_per_read") s.accesses_per_read = static_cast<int>(parse_int(kv));
    else if (kv.key == "read_len") s.read_len = static_cast<int>(parse_int(kv));
    else if (kv.key == "seed_len") s.seed_len = static_cast<int>(parse_int(kv));
    else if (kv.key == "banks") {
        std::vector<int> sweep;
        for (const std::string& item : split(kv.value, ','))
            try {
                sweep.push_back(std::stoi(item));
            } catch (const std::exception&) {
                fail(kv, "bad bank count '" + item + "'");
            }
        s.bank_sweep = std::move(sweep);
    }
    else fail(kv, "unknown key");
}

void apply_profiles(HarnessConfig& cfg, const KeyValue& kv, bool& replaced) {
    if (kv.key == "think_cycles") {
        cfg.profile_think_cycles = parse_int(kv);
        return;
    }
    // Any other key defines a profile: reuse,accesses,seed
    const auto parts = split(kv.value, ',');
    if (parts.size() != 3)
        fail(kv, "profile needs row_reuse_prob,accesses,seed");
    WorkloadProfile p;
    p.name = kv.key;
    try {
        p.row_reuse_prob = std::stod(parts[0]);
        p.accesses = std::stoll(parts[1]);
        p.seed = std::stoull(parts[2]);
    } catch (const std::exception&) {
        fail(kv, "bad profile values");
    }
    if (!replaced) {
        cfg.profiles.clear(); // user profiles supersede the default set
        replaced = true;
    }
    cfg.profiles.push_back(std::move(p));
}

} // namespace

void HarnessConfig::validate() const {
    dram.validate();
    cache.validate();
    analytic.validate();
    pim.validate();
    channel.validate(dram);
    for (const WorkloadProfile& p : profiles)
        p.validate();
    if (profile_think_cycles < 0)
        throw InvalidConfig("think_cycles must be >= 0");
    if (sidechannel.entry_size_bytes < 64 || sidechannel.rows_per_bank < 1 ||
        sidechannel.rounds < 1)
        throw InvalidConfig("sidechannel section invalid");
}

HarnessConfig parse_config_text(const std::string& text) {
    HarnessConfig cfg;
    bool profiles_replaced = false;
    for (const KeyValue& kv : lex_ini(text)) {
        if (kv.section == "dram") apply_dram(cfg, kv);
        else if (kv.section == "cache") apply_cache(cfg, kv);
        else if (kv.section == "pim") apply_pim(cfg, kv);
        else if (kv.section == "channel") apply_channel(cfg, kv);
        else if (kv.section == "sidechannel") apply_sidechannel(cfg, kv);
        else if (kv.section == "profiles") apply_profiles(cfg, kv, profiles_replaced);
        else throw ConfigParseError("line " + std::to_string(kv.line) + ": unknown section [" +
                                    kv.section + "]");
    }
    try {
        cfg.validate();
    } catch (const InvalidConfig& e) {
        throw ConfigParseError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

HarnessConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigParseError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

} // namespace impact
