#include "fluidq/app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "fluidq/csv.hpp"
#include "fluidq/error.hpp"
#include "fluidq/svg.hpp"

namespace fluidq::app {

namespace fs = std::filesystem;
using csv::format_double;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    for (auto& th : pool) th.join();
}

std::vector<PacketTrace> generate_users(const TrafficConfig& t, unsigned workers) {
    std::vector<PacketTrace> users(t.users);
    parallel_for(t.users, workers, [&](std::size_t u) {
        users[u] = generate_video_user(t.video, t.horizon, derive_seed(t.seed, u));
    });
    return users;
}

PacketTrace generate_merged(const TrafficConfig& t, unsigned workers) {
    if (t.users == 0) return PacketTrace{t.horizon, {}};
    auto users = generate_users(t, workers);
    return merge_traces(users);
}

std::string alpha_text(const LoadSummary& load) {
    return load.alpha ? format_double(*load.alpha) : "undefined";
}

class Writer {
public:
    explicit Writer(const fs::path& dir) : dir_(dir) { fs::create_directories(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    template <class F>
    void add(const std::string& name, F&& write) {
        const fs::path p = dir_ / name;
        write(p);
        if (!fs::exists(p)) throw InputError("artifact not written: " + p.string());
        written_.push_back(p);
    }

    std::vector<fs::path> done() { return std::move(written_); }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

std::vector<std::pair<std::string, std::string>> load_kv(const LoadSummary& load,
                                                         const ScenarioConfig& cfg) {
    return {{"users", std::to_string(cfg.traffic.users)},
            {"seed", std::to_string(cfg.traffic.seed)},
            {"horizon_s", format_double(cfg.traffic.horizon.length())},
            {"dt_s", format_double(cfg.solver.dt)},
            {"mu_bps", format_double(cfg.queue.mu)},
            {"lambda_bps", format_double(load.lambda)},
            {"rho", format_double(load.rho)},
            {"alpha", alpha_text(load)},
            {"interuse_mean_s", format_double(cfg.traffic.video.interuse_mean_s)}};
}

std::vector<std::pair<std::string, std::string>> report_kv(const ErrorReport& r) {
    return {{"rho", format_double(r.rho)},
            {"err_rel_max", format_double(r.err_rel_max)},
            {"max_occupancy_err", format_double(r.max_occupancy_err)},
            {"mean_rel_outflow_err", format_double(r.mean_rel_outflow_err)},
            {"mean_rel_excluded_bins", std::to_string(r.mean_rel_excluded_bins)},
            {"global_rel_err", format_double(r.global_rel_err)},
            {"aggregation_bound_s", format_double(r.aggregation_bound_s)},
            {"observed_delay_gap_s", format_double(r.observed_delay_gap_s)},
            {"baseline_mean_rel_err", format_double(r.baseline_mean_rel_err)},
            {"baseline_global_rel_err", format_double(r.baseline_global_rel_err)},
            {"max_q_disc_bits", format_double(r.max_q_disc)},
            {"max_q_log_bits", format_double(r.max_q_log)},
            {"runtime_fluid_s", format_double(r.runtime_fluid_s)},
            {"runtime_des_s", format_double(r.runtime_des_s)}};
}

const std::vector<std::string> kSweepColumns = {
    "point",          "interuse_scale",          "rho",
    "err_rel_max",    "max_occupancy_err",       "mean_rel_outflow_err",
    "global_rel_err", "baseline_mean_rel_err",   "baseline_global_rel_err",
    "aggregation_bound_s", "observed_delay_gap_s", "max_q_disc_bits",
    "max_q_log_bits", "runtime_fluid_s",         "runtime_des_s"};

std::vector<double> sweep_row(const SweepPoint& p) {
    const ErrorReport& r = *p.report;
    return {static_cast<double>(p.index), p.interuse_scale, r.rho, r.err_rel_max,
            r.max_occupancy_err, r.mean_rel_outflow_err, r.global_rel_err,
            r.baseline_mean_rel_err, r.baseline_global_rel_err, r.aggregation_bound_s,
            r.observed_delay_gap_s, r.max_q_disc, r.max_q_log, r.runtime_fluid_s,
            r.runtime_des_s};
}

std::vector<double> grid_times(const QueueTrajectory& tr) {
    std::vector<double> t(tr.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = tr.time_at(i);
    return t;
}

}  // namespace

LoadSummary summarize_load(const RateSeries& inflow, const QueueConfig& queue) {
    LoadSummary s;
    s.lambda = inflow.empty() ? 0.0 : mean_rate(inflow);
    s.rho = s.lambda / queue.mu;
    if (queue.alpha) s.alpha = queue.alpha;
    else if (s.lambda > 0.0) s.alpha = compute_alpha(inflow, queue.mu);
    return s;
}

double effective_alpha(const LoadSummary& load, double mu) {
    return load.alpha ? *load.alpha : 1.0 / mu;
}

QueueSpec queue_spec(const QueueConfig& queue, double alpha) {
    QueueSpec spec;
    spec.mu = ServiceRate::constant(queue.mu);
    spec.alpha = alpha;
    spec.q0 = queue.q0;
    spec.capacity = queue.capacity;
    spec.finite_params = queue.gate;
    return spec;
}

QueueTrajectory solve_queue(const RateSeries& inflow, const QueueConfig& queue, double alpha,
                            const SolverOptions& opts) {
    const QueueSpec spec = queue_spec(queue, alpha);
    return queue.capacity ? integrate_finite_queue(inflow, spec, opts)
                          : integrate_queue(inflow, spec, opts);
}

ValidationRun run_validation(const ScenarioConfig& config, unsigned workers) {
    const ScenarioConfig cfg = resolve_intensity(config, workers);
    ValidationRun run;
    const double dt = cfg.solver.dt;
    const Horizon& hz = cfg.traffic.horizon;

    auto t_start = Clock::now();
    const PacketTrace trace = generate_merged(cfg.traffic, workers);
    run.packets = trace.events.size();
    run.runtime_generation_s = seconds_since(t_start);

    t_start = Clock::now();
    run.inflow = trace_to_inflow(trace, dt);
    run.runtime_binning_s = seconds_since(t_start);

    SolverOptions opts = cfg.solver.options;
    if (!(opts.output_dt > 0.0)) opts.output_dt = dt;

    t_start = Clock::now();
    run.load = summarize_load(run.inflow, cfg.queue);
    run.alpha = effective_alpha(run.load, cfg.queue.mu);
    run.logistic = solve_queue(run.inflow, cfg.queue, run.alpha, opts);
    const double fluid_s = seconds_since(t_start);
    run.y_log = run.logistic.outflow_series();

    std::vector<double> q_disc;
    double des_s = 0.0;
    if (cfg.validation.des) {
        const DesConfig dc{cfg.queue.mu, cfg.queue.capacity,
                           cfg.validation.sample_dt.value_or(opts.output_dt)};
        t_start = Clock::now();
        run.des = simulate_fifo(trace, dc);
        run.y_des = departures_to_outflow(*run.des, dt, hz);
        des_s = seconds_since(t_start);

        // Compare on the common sample grid.
        const double ratio = dc.sample_dt / opts.output_dt;
        const auto step = static_cast<std::size_t>(std::llround(ratio));
        if (step == 0 || std::abs(ratio - static_cast<double>(step)) > 1e-9)
            throw ParameterError("validation.sample_dt must be a multiple of solver.output_dt");
        std::vector<double> q_log;
        for (std::size_t i = 0; i < run.des->q_sampled.size(); ++i) {
            const std::size_t j = i * step;
            if (j >= run.logistic.size()) break;
            q_disc.push_back(run.des->q_sampled[i]);
            q_log.push_back(run.logistic.q[j]);
        }

        ErrorReport& r = run.report;
        r.rho = run.load.rho;
        const std::size_t ny = std::min(run.y_des.size(), run.y_log.size());
        const std::span<const double> yd(run.y_des.values.data(), ny);
        const std::span<const double> yl(run.y_log.values.data(), ny);
        const std::span<const double> yx(run.inflow.values.data(),
                                         std::min(ny, run.inflow.size()));
        const bool any_backlog = std::any_of(q_disc.begin(), q_disc.end(),
                                             [](double v) { return v > 0.0; });
        r.err_rel_max = any_backlog ? error_relative_to_max(q_disc, q_log) : 0.0;
        r.max_occupancy_err = any_backlog ? max_occupancy_error(q_disc, q_log) : 0.0;
        const bool any_out = std::any_of(yd.begin(), yd.end(), [](double v) { return v != 0.0; });
        if (any_out) {
            const auto mre = mean_relative_outflow_error(yd, yl);
            r.mean_rel_outflow_err = mre.value;
            r.mean_rel_excluded_bins = mre.excluded;
            r.global_rel_err = global_relative_error(yd, yl);
            r.baseline_mean_rel_err = mean_relative_outflow_error(yd.first(yx.size()), yx).value;
            r.baseline_global_rel_err = global_relative_error(yd.first(yx.size()), yx);
        }
        if (run.load.rho < 1.0)
            r.aggregation_bound_s = aggregation_error_bound(cfg.queue.mu, run.load.rho, dt).seconds;
        r.observed_delay_gap_s = observed_delay_gap(q_disc, q_log, cfg.queue.mu);
        r.max_q_disc = q_disc.empty() ? 0.0 : *std::max_element(q_disc.begin(), q_disc.end());
        r.max_q_log = q_log.empty() ? 0.0 : *std::max_element(q_log.begin(), q_log.end());
    } else {
        run.report.rho = run.load.rho;
        run.report.max_q_log = run.logistic.max_q();
    }
    run.report.runtime_fluid_s = fluid_s;
    run.report.runtime_des_s = des_s;
    return run;
}

double interuse_scale_for_rho(const VideoUserParams& params, std::size_t users, double mu,
                              double rho) {
    if (users == 0) throw ParameterError("sweep: target_rho needs at least one user");
    const double target = rho * mu / static_cast<double>(users);
    auto rate = [&](double scale) {
        VideoUserParams p = params;
        p.interuse_mean_s = params.interuse_mean_s * scale;
        return expected_user_rate(p);
    };
    // The user rate decreases in the interuse mean.
    double lo = 1e-6, hi = 1e6;
    if (!(rate(lo) >= target && rate(hi) <= target))
        throw ParameterError("sweep: target_rho " + format_double(rho) + " is not reachable");
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (rate(mid) > target ? lo : hi) = mid;
        if (hi / lo < 1.0 + 1e-14) break;
    }
    return std::sqrt(lo * hi);
}

double calibrate_interuse_scale(const ScenarioConfig& cfg, double rho, unsigned workers) {
    const TrafficConfig& t = cfg.traffic;
    const VideoUserParams& v = t.video;
    double scale = interuse_scale_for_rho(v, t.users, cfg.queue.mu, rho);
    double best = scale, best_miss = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 8; ++it) {
        VideoUserParams p = v;
        p.interuse_mean_s = v.interuse_mean_s * scale;
        const RateSeries x =
            generate_aggregate_inflow(p, t.horizon, t.users, t.seed, cfg.solver.dt, workers);
        const double got = mean_rate(x) / cfg.queue.mu;
        const double miss = std::abs(got / rho - 1.0);
        if (miss < best_miss) {
            best = scale;
            best_miss = miss;
        }
        if (miss < 1e-3 || !(got > 0.0)) break;
        // Rate ~ c / (session + interuse): solve for the interuse that gives rho.
        const double session = v.mean_session_s();
        const double c = got * (session + p.interuse_mean_s);
        const double interuse = c / rho - session;
        if (!(interuse > 0.0)) break;
        scale = interuse / v.interuse_mean_s;
    }
    return best;
}

ScenarioConfig resolve_intensity(const ScenarioConfig& cfg, unsigned workers) {
    ScenarioConfig c = cfg;
    if (cfg.traffic.target_rho) {
        c.traffic.video.interuse_mean_s *=
            calibrate_interuse_scale(cfg, *cfg.traffic.target_rho, workers);
        c.traffic.target_rho.reset();
    }
    return c;
}

std::vector<double> sweep_scales(const ScenarioConfig& cfg, unsigned workers) {
    if (!cfg.sweep.target_rho.empty()) {
        std::vector<double> s(cfg.sweep.target_rho.size());
        parallel_for(s.size(), workers, [&](std::size_t i) {
            s[i] = calibrate_interuse_scale(cfg, cfg.sweep.target_rho[i]);
        });
        return s;
    }
    if (!cfg.sweep.interuse_scales.empty()) return cfg.sweep.interuse_scales;
    return {1.0};
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, unsigned workers) {
    const ScenarioConfig base = resolve_intensity(cfg, workers);
    const auto scales = sweep_scales(cfg, workers);
    std::vector<SweepPoint> points(scales.size());
    // Points run side by side; each uses one generation worker.
    const unsigned outer = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(scales.size())));
    const unsigned inner = std::max(1u, workers / outer);
    parallel_for(scales.size(), outer, [&](std::size_t i) {
        SweepPoint& p = points[i];
        p.index = i;
        p.interuse_scale = scales[i];
        try {
            ScenarioConfig c = cfg.sweep.target_rho.empty() ? base : cfg;
            c.traffic.target_rho.reset();
            c.traffic.video.interuse_mean_s *= scales[i];
            p.report = run_validation(c, inner).report;
        } catch (const std::exception& e) {
            p.error = e.what();
        }
    });
    return points;
}

std::vector<RateSeries> dt_inflows(const ScenarioConfig& cfg, unsigned workers) {
    if (!cfg.network) throw ParameterError("dt: the config has no network section");
    const NetworkConfig& net = *cfg.network;
    const std::size_t n = net.topology.origins();
    std::vector<RateSeries> flows(n);
    const std::size_t users = net.full_generation ? net.users_per_flow : net.simulated_users;
    for (std::size_t i = 0; i < n; ++i) {
        RateSeries x = generate_aggregate_inflow(cfg.traffic.video, cfg.traffic.horizon, users,
                                                 derive_seed(cfg.traffic.seed, 1000 + i),
                                                 cfg.solver.dt, workers);
        if (!net.full_generation) {
            const double m = mean_rate(x);
            double factor = static_cast<double>(net.users_per_flow) /
                            static_cast<double>(net.simulated_users);
            if (net.flow_mean_rate) {
                if (!(m > 0.0)) throw DomainError("dt: a generated flow carries no traffic");
                factor = *net.flow_mean_rate / m;
            }
            x = scale_series(x, factor);
        }
        flows[i] = std::move(x);
    }
    return flows;
}

DtRun run_dt(const ScenarioConfig& cfg, unsigned workers) {
    const auto t_start = Clock::now();
    DtRun run;
    const NetworkConfig& net = *cfg.network;
    run.inflows = dt_inflows(cfg, workers);
    SolverOptions opts = cfg.solver.options;
    run.state = propagate(net.topology, run.inflows, opts);
    run.latency = expected_latency_series(run.state, net.topology);
    run.l_max = max_expected_latency(run.state, net.topology);

    run.priority_rates = net.priority.rates;
    run.priority_l_max.assign(run.priority_rates.size(), 0.0);
    const RateSeries& grid = run.inflows.front();
    parallel_for(run.priority_rates.size(), workers, [&](std::size_t k) {
        RateSeries p = grid;
        std::fill(p.values.begin(), p.values.end(), run.priority_rates[k]);
        const DtState st = inject_priority_flow(net.topology, run.inflows, p, opts);
        run.priority_l_max[k] = max_expected_latency(st, net.topology);
    });
    run.runtime_s = seconds_since(t_start);
    return run;
}

// ---------------------------------------------------------------------------

std::vector<fs::path> cmd_generate(const ScenarioConfig& config, const RunContext& ctx) {
    const ScenarioConfig cfg = resolve_intensity(config, ctx.workers);
    Writer out(ctx.out_dir);
    const TrafficConfig& t = cfg.traffic;
    std::vector<PacketTrace> users = t.users ? generate_users(t, ctx.workers)
                                             : std::vector<PacketTrace>{};
    if (t.per_user_traces) {
        fs::create_directories(out.path("users"));
        for (std::size_t u = 0; u < users.size(); ++u)
            out.add("users/user_" + std::to_string(u) + ".csv",
                    [&](const fs::path& p) { csv::write_trace(p, users[u]); });
    }
    const PacketTrace merged = users.empty() ? PacketTrace{t.horizon, {}} : merge_traces(users);
    users.clear();
    out.add("trace.csv", [&](const fs::path& p) { csv::write_trace(p, merged); });
    const RateSeries inflow = trace_to_inflow(merged, cfg.solver.dt);
    out.add("inflow.csv", [&](const fs::path& p) { csv::write_rate_series(p, inflow); });

    const LoadSummary load = summarize_load(inflow, cfg.queue);
    auto kv = load_kv(load, cfg);
    kv.emplace_back("packets", std::to_string(merged.events.size()));
    kv.emplace_back("total_bits", format_double(merged.total_bits()));
    out.add("summary.txt", [&](const fs::path& p) { csv::write_key_values(p, kv); });
    return out.done();
}

std::vector<fs::path> cmd_simulate(const ScenarioConfig& config, const RunContext& ctx) {
    const ScenarioConfig cfg = resolve_intensity(config, ctx.workers);
    Writer out(ctx.out_dir);
    const TrafficConfig& t = cfg.traffic;
    const RateSeries inflow =
        generate_aggregate_inflow(t.video, t.horizon, t.users, t.seed, cfg.solver.dt, ctx.workers);
    const LoadSummary load = summarize_load(inflow, cfg.queue);
    const double alpha = effective_alpha(load, cfg.queue.mu);
    const auto traj = solve_queue(inflow, cfg.queue, alpha, cfg.solver.options);

    out.add("inflow.csv", [&](const fs::path& p) { csv::write_rate_series(p, inflow); });
    out.add("trajectory.csv", [&](const fs::path& p) { csv::write_trajectory(p, traj); });
    out.add("outflow.csv",
            [&](const fs::path& p) { csv::write_rate_series(p, traj.outflow_series()); });

    const auto lam = exit_times(traj);
    csv::Table exits{{"t_s", "exit_time_s"}, {}};
    for (std::size_t i = 0; i < traj.size(); ++i) exits.rows.push_back({traj.time_at(i), lam[i]});
    out.add("exit_times.csv", [&](const fs::path& p) { csv::write_table(p, exits); });

    auto kv = load_kv(load, cfg);
    kv.emplace_back("alpha_used", format_double(alpha));
    kv.emplace_back("max_q_bits", format_double(traj.max_q()));
    kv.emplace_back("lost_bits", format_double(traj.lost_bits()));
    kv.emplace_back("solver_steps", std::to_string(traj.stats.steps));
    out.add("summary.txt", [&](const fs::path& p) { csv::write_key_values(p, kv); });

    svg::Plot plot{"Queue size", "t [s]", "q [bits]", {{"logistic", grid_times(traj), traj.q}}};
    out.add("queue.svg", [&](const fs::path& p) { svg::write(p, plot); });
    return out.done();
}

std::vector<fs::path> cmd_validate(const ScenarioConfig& cfg, const RunContext& ctx) {
    Writer out(ctx.out_dir);
    const ValidationRun run = run_validation(cfg, ctx.workers);

    out.add("inflow.csv", [&](const fs::path& p) { csv::write_rate_series(p, run.inflow); });
    out.add("trajectory_logistic.csv",
            [&](const fs::path& p) { csv::write_trajectory(p, run.logistic); });
    out.add("outflow_logistic.csv",
            [&](const fs::path& p) { csv::write_rate_series(p, run.y_log); });
    if (run.des) {
        out.add("queue_des.csv", [&](const fs::path& p) { csv::write_queue_samples(p, *run.des); });
        out.add("outflow_des.csv", [&](const fs::path& p) { csv::write_rate_series(p, run.y_des); });
    }

    auto kv = load_kv(run.load, cfg);
    kv.emplace_back("alpha_used", format_double(run.alpha));
    kv.emplace_back("packets", std::to_string(run.packets));
    for (auto& e : report_kv(run.report)) kv.push_back(std::move(e));
    kv.emplace_back("runtime_binning_s", format_double(run.runtime_binning_s));
    kv.emplace_back("runtime_generation_s", format_double(run.runtime_generation_s));
    const double speedup = run.report.runtime_fluid_s > 0.0
                               ? run.report.runtime_des_s / run.report.runtime_fluid_s
                               : 0.0;
    kv.emplace_back("speedup", format_double(speedup));
    out.add("report.txt", [&](const fs::path& p) { csv::write_key_values(p, kv); });

    svg::Plot plot{"Queue size", "t [s]", "q [bits]",
                   {{"logistic", grid_times(run.logistic), run.logistic.q}}};
    if (run.des) {
        std::vector<double> t(run.des->q_sampled.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = run.des->sample_time(i);
        plot.series.push_back({"discrete event", t, run.des->q_sampled});
    }
    out.add("queue.svg", [&](const fs::path& p) { svg::write(p, plot); });
    return out.done();
}

std::vector<fs::path> cmd_sweep(const ScenarioConfig& cfg, const RunContext& ctx) {
    Writer out(ctx.out_dir);
    const auto points = run_sweep(cfg, ctx.workers);

    csv::Table table{kSweepColumns, {}};
    csv::Table failures{{"point", "interuse_scale"}, {}};
    std::vector<std::pair<std::string, std::string>> errors;
    for (const auto& p : points) {
        if (p.report) {
            table.rows.push_back(sweep_row(p));
        } else {
            failures.rows.push_back({static_cast<double>(p.index), p.interuse_scale});
            errors.emplace_back("point_" + std::to_string(p.index), p.error);
        }
    }
    out.add("sweep.csv", [&](const fs::path& p) { csv::write_table(p, table); });
    if (!errors.empty())
        out.add("failures.txt", [&](const fs::path& p) { csv::write_key_values(p, errors); });

    std::vector<double> rho;
    for (const auto& r : table.rows) rho.push_back(r[2]);
    for (std::size_t c = 3; c < kSweepColumns.size(); ++c) {
        std::vector<double> y;
        for (const auto& r : table.rows) y.push_back(r[c]);
        svg::Plot plot{kSweepColumns[c] + " vs intensity", "rho", kSweepColumns[c],
                       {{kSweepColumns[c], rho, y}}};
        out.add("sweep_" + kSweepColumns[c] + ".svg",
                [&](const fs::path& p) { svg::write(p, plot); });
    }
    return out.done();
}

std::vector<fs::path> cmd_dt(const ScenarioConfig& cfg, const RunContext& ctx) {
    if (!cfg.network) throw ParameterError("dt: the config has no network section");
    Writer out(ctx.out_dir);
    const DtRun run = run_dt(cfg, ctx.workers);
    const Topology& topo = cfg.network->topology;

    for (std::size_t i = 0; i < run.inflows.size(); ++i)
        out.add("inflow_" + std::to_string(i + 1) + ".csv",
                [&](const fs::path& p) { csv::write_rate_series(p, run.inflows[i]); });
    out.add("core_trajectory.csv",
            [&](const fs::path& p) { csv::write_trajectory(p, run.state.core); });
    for (std::size_t j = 0; j < run.state.egress.size(); ++j)
        out.add("egress_" + std::to_string(j + 1) + "_trajectory.csv",
                [&](const fs::path& p) { csv::write_trajectory(p, run.state.egress[j]); });
    out.add("latency.csv", [&](const fs::path& p) { csv::write_latency(p, run.latency); });

    std::vector<std::pair<std::string, std::string>> kv{
        {"origins", std::to_string(topo.origins())},
        {"destinations", std::to_string(topo.destinations())},
        {"L_max_s", format_double(run.l_max)},
        {"runtime_s", format_double(run.runtime_s)}};
    for (std::size_t i = 0; i < topo.origins(); ++i) {
        std::string row;
        for (std::size_t j = 0; j < topo.destinations(); ++j)
            row += (j ? " " : "") + format_double(topo.routing[i][j]);
        kv.emplace_back("p_" + std::to_string(i + 1), row);
        kv.emplace_back("flow_" + std::to_string(i + 1) + "_mean_bps",
                        format_double(mean_rate(run.inflows[i])));
    }
    out.add("summary.txt", [&](const fs::path& p) { csv::write_key_values(p, kv); });

    svg::Plot lat{"Expected latency", "t [s]", "L_od [s]", {{"L_od", run.latency.t, run.latency.l_od}}};
    out.add("latency.svg", [&](const fs::path& p) { svg::write(p, lat); });

    if (!run.priority_rates.empty()) {
        csv::Table pt{{"priority_rate_bps", "L_max_s"}, {}};
        for (std::size_t k = 0; k < run.priority_rates.size(); ++k)
            pt.rows.push_back({run.priority_rates[k], run.priority_l_max[k]});
        out.add("priority_sweep.csv", [&](const fs::path& p) { csv::write_table(p, pt); });
        std::vector<double> gbps;
        for (double r : run.priority_rates) gbps.push_back(r / 1e9);
        svg::Plot pp{"Maximum expected latency vs priority rate", "priority rate [Gb/s]",
                     "L_max [s]", {{"L_max", gbps, run.priority_l_max}}};
        out.add("priority_sweep.svg", [&](const fs::path& p) { svg::write(p, pp); });
    }
    return out.done();
}

}  // namespace fluidq::app
