#pragma once

#include <optional>
#include <string>
#include <vector>

#include "impact/config.hpp"

namespace impact {

struct ExperimentSpec {
    std::string name;
    std::string config_path; // empty: built-in defaults
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::optional<std::string> message_hex;
    std::int64_t random_bits = 0; // 0: per-experiment default
    std::optional<RowPolicy> policy_override;
    bool partition = false;
    bool parallel = false;
};

struct ExperimentOutput {
    std::string csv;
    std::string summary;
};

const std::vector<std::string>& experiment_names();

/// Builds one experiment's artifacts in memory (no file output). Throws
/// SimError subclasses on config or invariant failures.
ExperimentOutput build_experiment(const ExperimentSpec& spec, const HarnessConfig& cfg);

/// Parses the config, runs the experiment and writes <name>.csv and
/// <name>.summary.txt under spec.out_dir. Returns 0 on success.
int run_experiment(const ExperimentSpec& spec);

/// Receiver-visible PEI probe latencies per row-buffer outcome class.
struct LatencyClasses {
    Cycle hit;
    Cycle empty;
    Cycle conflict;
};
LatencyClasses probe_latency_classes(const HarnessConfig& cfg);

/// Channel runs used by several experiments and the acceptance suite.
ChannelResult run_throughput_channel(const HarnessConfig& cfg, ChannelKind kind,
                                     std::int64_t bits, std::uint64_t seed);

} // namespace impact
