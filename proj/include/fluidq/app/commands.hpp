#pragma once

// Run orchestration behind the command line front end. The run_* functions
// compute results without touching the file system; the cmd_* functions run
// them and write the artifacts into an output directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fluidq/app/config.hpp"
#include "fluidq/des.hpp"
#include "fluidq/fluid.hpp"
#include "fluidq/metrics.hpp"
#include "fluidq/network.hpp"

namespace fluidq::app {

struct RunContext {
    std::filesystem::path out_dir = ".";
    unsigned workers = 1;
};

// lambda, rho and alpha of an inflow against the configured queue. alpha is
// empty when lambda = 0 and no alpha is pinned.
struct LoadSummary {
    double lambda = 0.0;
    double rho = 0.0;
    std::optional<double> alpha;
};
LoadSummary summarize_load(const RateSeries& inflow, const QueueConfig& queue);

// alpha used for integration: pinned, rho / mu, or 1 / mu for an idle inflow.
double effective_alpha(const LoadSummary& load, double mu);

QueueSpec queue_spec(const QueueConfig& queue, double alpha);

// Logistic (finite when a capacity is set) trajectory for an inflow.
QueueTrajectory solve_queue(const RateSeries& inflow, const QueueConfig& queue, double alpha,
                            const SolverOptions& opts);

struct ValidationRun {
    RateSeries inflow;
    LoadSummary load;
    double alpha = 0.0;
    QueueTrajectory logistic;
    std::optional<DesResult> des;
    RateSeries y_des;
    RateSeries y_log;
    ErrorReport report;
    std::size_t packets = 0;
    double runtime_generation_s = 0.0;
    double runtime_binning_s = 0.0;  // packet trace to inflow series
};

// traffic -> (DES, logistic) -> metrics. Fluid runtime covers alpha and the
// integration; DES runtime covers the event simulation and departure binning.
ValidationRun run_validation(const ScenarioConfig& cfg, unsigned workers = 1);

struct SweepPoint {
    std::size_t index = 0;
    double interuse_scale = 1.0;
    std::optional<ErrorReport> report;
    std::string error;  // set when the point failed
};

// Interuse scale for which `users` users load mu at intensity rho.
double interuse_scale_for_rho(const VideoUserParams& params, std::size_t users, double mu,
                              double rho);

// Interuse scale for which the generated aggregate inflow (same seed and
// horizon) has intensity rho against queue.mu, refined from the analytic
// estimate by a few fixed-point passes.
double calibrate_interuse_scale(const ScenarioConfig& cfg, double rho, unsigned workers = 1);

// Applies traffic.target_rho, if set, to the interuse mean.
ScenarioConfig resolve_intensity(const ScenarioConfig& cfg, unsigned workers = 1);

// Sweep grid: target_rho when given, else interuse_scales, else {1}.
std::vector<double> sweep_scales(const ScenarioConfig& cfg, unsigned workers = 1);

// Runs validation at every grid point with the same seed; failures are
// recorded per point.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, unsigned workers = 1);

struct DtRun {
    std::vector<RateSeries> inflows;
    DtState state;
    LatencySeries latency;
    double l_max = 0.0;
    std::vector<double> priority_rates;
    std::vector<double> priority_l_max;
    double runtime_s = 0.0;
};

std::vector<RateSeries> dt_inflows(const ScenarioConfig& cfg, unsigned workers = 1);
DtRun run_dt(const ScenarioConfig& cfg, unsigned workers = 1);

// Commands. Each returns the list of files written and throws on failure.
std::vector<std::filesystem::path> cmd_generate(const ScenarioConfig& cfg, const RunContext& ctx);
std::vector<std::filesystem::path> cmd_simulate(const ScenarioConfig& cfg, const RunContext& ctx);
std::vector<std::filesystem::path> cmd_validate(const ScenarioConfig& cfg, const RunContext& ctx);
std::vector<std::filesystem::path> cmd_sweep(const ScenarioConfig& cfg, const RunContext& ctx);
std::vector<std::filesystem::path> cmd_dt(const ScenarioConfig& cfg, const RunContext& ctx);

}  // namespace fluidq::app
