#pragma once

// Scenario configuration: a JSON document with sections traffic, queue,
// solver, validation, network and sweep. Every section and key is optional;
// unknown keys are rejected with their path. Rates, sizes and durations
// accept plain numbers (bits/s, bits, seconds) or strings with units such as
// "11.33 Mb/s", "25 GB", "1464 B", "45 min", "1 d".

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluidq/fluid.hpp"
#include "fluidq/network.hpp"
#include "fluidq/traffic.hpp"

namespace fluidq::app {

// Schema violation; `path` is the dotted location of the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

double parse_rate(const std::string& text);      // -> bits/s
double parse_size(const std::string& text);      // -> bits
double parse_duration(const std::string& text);  // -> seconds

struct TrafficConfig {
    std::size_t users = 10;
    std::uint64_t seed = 1;
    Horizon horizon{0.0, 6 * 3600.0};
    VideoUserParams video;
    // Rescales the interuse mean so the generated inflow loads the queue at
    // this intensity.
    std::optional<double> target_rho;
    bool per_user_traces = true;  // generate: also write one trace file per user
};

struct QueueConfig {
    double mu = 11.33e6;
    std::optional<double> alpha;  // unset: "auto" = rho / mu
    double q0 = 0.0;
    std::optional<double> capacity;
    std::optional<FiniteQueueParams> gate;
};

struct SolverConfig {
    SolverOptions options;
    double dt = 60.0;  // aggregation step
};

struct ValidationConfig {
    std::optional<double> sample_dt;  // defaults to the aggregation step
    bool des = true;
};

struct PriorityConfig {
    std::vector<double> rates;  // bits/s, swept
    // "uniform" (1/m each), "none" (terminates at D) or explicit weights.
    std::vector<double> egress_share;
    bool share_uniform = true;
};

struct NetworkConfig {
    Topology topology;
    std::size_t users_per_flow = 10000;  // nominal population per origin
    std::size_t simulated_users = 100;   // users actually generated per origin
    std::optional<double> flow_mean_rate;  // scale each flow to this mean
    bool full_generation = false;           // generate users_per_flow users, no scaling
    PriorityConfig priority;
};

struct SweepConfig {
    std::vector<double> interuse_scales;
    std::vector<double> target_rho;
};

struct ScenarioConfig {
    TrafficConfig traffic;
    QueueConfig queue;
    SolverConfig solver;
    ValidationConfig validation;
    std::optional<NetworkConfig> network;
    SweepConfig sweep;
};

// Topology of the reference two-tier scenario: 4 access links at 25 Gb/s,
// a 100 Gb/s core with a 25 GB buffer, 5 egress links at 20 Gb/s.
Topology reference_topology();

ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace fluidq::app
