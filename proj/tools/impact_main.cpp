#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "impact/experiments.hpp"

namespace {

std::string experiment_list() {
    std::string out;
    for (const std::string& name : impact::experiment_names()) {
        if (!out.empty())
            out += ", ";
        out += name;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"impact: PiM row-buffer timing channel experiment harness"};

    impact::ExperimentSpec spec;
    std::string policy;
    std::string message;

    app.add_option("experiment", spec.name, "one of: " + experiment_list())->required();
    app.add_option("--config", spec.config_path, "INI config file (defaults when omitted)");
    app.add_option("--out", spec.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", spec.seed, "run seed (env IMPACT_SEED as fallback)");
    app.add_option("--random-bits", spec.random_bits, "send N random message bits");
    app.add_option("--message", message, "message as a hex string");
    app.add_option("--policy", policy, "open|closed|constant|partition");
    app.add_flag("--parallel", spec.parallel, "run independent sweep points concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (app.count("--seed") == 0) {
        if (const char* env = std::getenv("IMPACT_SEED"))
            spec.seed = std::strtoull(env, nullptr, 10);
    }
    if (!message.empty())
        spec.message_hex = message;
    if (!policy.empty()) {
        if (policy == "open")
            spec.policy_override = impact::RowPolicy::OpenTimeout;
        else if (policy == "closed")
            spec.policy_override = impact::RowPolicy::ClosedRow;
        else if (policy == "constant")
            spec.policy_override = impact::RowPolicy::ConstantTime;
        else if (policy == "partition")
            spec.partition = true;
        else {
            std::cerr << "error: unknown policy '" << policy << "'\n";
            return 2;
        }
    }

    bool known = false;
    for (const std::string& name : impact::experiment_names())
        known = known || name == spec.name;
    if (!known) {
        std::cerr << "error: unknown experiment '" << spec.name << "'\n"
                  << "usage: impact <experiment> [--config F] [--out DIR] [--seed N]\n"
                  << "experiments: " << experiment_list() << "\n";
        return 2;
    }

    try {
        return impact::run_experiment(spec);
    } catch (const impact::ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const impact::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
