// Acceptance checks. Prints one PASS/FAIL line per criterion followed by
// the measured numbers; exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fluidq/app/commands.hpp"
#include "fluidq/app/config.hpp"
#include "fluidq/fluid.hpp"
#include "oracles.hpp"

using namespace fluidq;
namespace app = fluidq::app;

namespace {

// Pinned thresholds.
constexpr std::size_t kPropertyScenarios = 100;
constexpr double kPropertyBudgetS = 120.0;
constexpr double kFiniteSlack = 1e-6;

constexpr std::size_t kOracleSeeds = 5;
constexpr double kOracleRho = 0.53;
constexpr double kErrRelMax = 0.05;
constexpr double kMaxOccupancy = 0.10;
constexpr double kMeanRelOutflow = 0.03;
constexpr double kGlobalRel = 0.06;
constexpr double kOracleBudgetS = 600.0;

const std::vector<double> kSweepRho = {0.45, 0.55, 0.65, 0.75, 0.85};
constexpr double kSweepGlobalRel = 0.06;

constexpr double kBoundBudgetS = 1.0;
constexpr double kPulseBudgetS = 5.0;

constexpr double kLatencyLo = 0.05, kLatencyHi = 0.5;
const std::vector<double> kPriorityRates = {0, 5e9, 10e9, 15e9, 18e9, 20e9};
constexpr double kDtBudgetS = 300.0;

constexpr double kSpeedup = 100.0;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
    std::printf("[%s] %d. %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double trapezoid(const RateSeries& x) {
    double acc = x.values.front() * x.dt;
    for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x.values[i - 1] + x.values[i]) * x.dt;
    return acc;
}

// ---------------------------------------------------------------------------

void property_suite() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SolverOptions opts;
    std::size_t bad_pos = 0, bad_cons = 0, bad_range = 0, bad_fifo = 0, bad_finite = 0,
                bad_prio = 0, bad_split = 0;
    double worst_finite = 0.0;

    for (std::size_t trial = 0; trial < kPropertyScenarios; ++trial) {
        const double mu = std::pow(10.0, 6.0 * u(rng));
        const double dt = 0.5 + 10.0 * u(rng);
        const auto bins = static_cast<std::size_t>(30 + 150 * u(rng));
        const RateSeries x = oracle::random_inflow(rng, bins, dt, mu);
        const double alpha = (0.05 + 2.0 * u(rng)) / mu;
        const double q0 = u(rng) < 0.5 ? 0.0 : u(rng) * 5.0 * mu * dt;

        QueueSpec spec;
        spec.mu = mu;
        spec.alpha = alpha;
        spec.q0 = q0;
        const auto tr = integrate_queue(x, spec, opts);
        const LinearSignal sig = LinearSignal::from_series(x);

        // positivity
        if (std::any_of(tr.q.begin(), tr.q.end(), [](double q) { return q < 0.0; }) ||
            tr.stats.max_negative_q > 1e-6 * tr.max_q() + 10 * opts.abs_tol)
            ++bad_pos;
        // Y-range
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double xi = sig(tr.time_at(i));
            if (tr.y[i] < std::min(mu, xi) * (1 - 1e-12) || tr.y[i] > mu * (1 + 1e-12)) {
                ++bad_range;
                break;
            }
        }
        // conservation
        const double in = trapezoid(x);
        if (std::abs((tr.q.back() - q0) - (in - tr.served.back())) > 10 * opts.rel_tol * (in + q0))
            ++bad_cons;
        // FIFO: exit times nondecreasing up to solver tolerance
        const auto lam = exit_times(tr);
        const double tol = (opts.abs_tol + opts.rel_tol * tr.max_q()) / mu;
        for (std::size_t i = 1; i < lam.size(); ++i)
            if (lam[i] < lam[i - 1] - tol) {
                ++bad_fifo;
                break;
            }

        // finite queue with the default gate
        QueueSpec fin = spec;
        fin.q0 = 0.0;
        const double k = (0.05 + u(rng)) * mu * dt * static_cast<double>(bins) * 0.2;
        fin.capacity = k;
        const auto ft = integrate_finite_queue(x, fin, opts);
        const double excess = ft.max_q() / k - 1.0;
        worst_finite = std::max(worst_finite, excess);
        if (excess > kFiniteSlack) ++bad_finite;

        // priority pair: mu1 + mu2 = mu
        const RateSeries x2 = oracle::random_inflow(rng, bins, dt, mu);
        const auto pair = integrate_priority_pair(x, x2, mu, alpha, q0, 0.0, opts);
        for (std::size_t i = 0; i < pair.high.size(); ++i)
            if (std::abs(pair.high.mu[i] + pair.low.mu[i] - mu) > 1e-12 * mu) {
                ++bad_prio;
                break;
            }

        // split conservation
        const RateSeries total = add_series(x, x2);
        const auto tt = integrate_queue(total, spec, opts);
        const RateSeries y = tt.outflow_series();
        const std::vector<RateSeries> parts = {x, x2};
        const auto sp = split_outflow(parts, RateSeries{y.t0, y.dt, {y.values.begin(),
                                                                      y.values.begin() + bins}});
        for (std::size_t i = 0; i < bins; ++i) {
            const double sum = sp[0].values[i] + sp[1].values[i];
            const double expect = total.values[i] < 1e-12 ? 0.0 : y.values[i];
            if (std::abs(sum - expect) > 1e-12 * std::max(1.0, expect)) {
                ++bad_split;
                break;
            }
        }
    }
    const double secs = since(t0);
    const bool ok = bad_pos + bad_cons + bad_range + bad_fifo + bad_finite + bad_prio +
                            bad_split == 0 &&
                    secs < kPropertyBudgetS;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "property suite over %zu scenarios: violations positivity=%zu conservation=%zu "
                  "range=%zu fifo=%zu finite=%zu (worst q/k-1 = %.2e) priority=%zu split=%zu; "
                  "%.1f s (< %.0f s)",
                  kPropertyScenarios, bad_pos, bad_cons, bad_range, bad_fifo, bad_finite,
                  worst_finite, bad_prio, bad_split, secs, kPropertyBudgetS);
    verdict(1, ok, buf);
}

// ---------------------------------------------------------------------------

struct OracleTotals {
    double fluid_s = 0.0;
    double des_s = 0.0;
    double binning_s = 0.0;
};

OracleTotals oracle_equivalence() {
    const auto t0 = Clock::now();
    OracleTotals tot;
    bool ok = true;
    for (std::size_t s = 1; s <= kOracleSeeds; ++s) {
        auto cfg = app::parse_config(R"({"traffic": {"users": 10, "horizon": "6 h"},
            "queue": {"mu": "11.33 Mb/s"}, "solver": {"dt": 60}})");
        cfg.traffic.target_rho = kOracleRho;
        cfg.traffic.seed = s;
        const auto run = app::run_validation(cfg);
        const auto& r = run.report;
        const bool pass = r.err_rel_max <= kErrRelMax && r.max_occupancy_err <= kMaxOccupancy &&
                          r.mean_rel_outflow_err <= kMeanRelOutflow &&
                          r.global_rel_err <= kGlobalRel &&
                          r.observed_delay_gap_s <= r.aggregation_bound_s;
        ok = ok && pass;
        std::printf("    seed %zu: rho=%.3f err_rel_max=%.4f max_occupancy_err=%.4f "
                    "mean_rel_outflow_err=%.4f global_rel_err=%.4f delay_gap=%.2f s "
                    "bound=%.2f s %s\n",
                    s, r.rho, r.err_rel_max, r.max_occupancy_err, r.mean_rel_outflow_err,
                    r.global_rel_err, r.observed_delay_gap_s, r.aggregation_bound_s,
                    pass ? "ok" : "over threshold");
        tot.fluid_s += r.runtime_fluid_s;
        tot.des_s += r.runtime_des_s;
        tot.binning_s += run.runtime_binning_s;
    }
    const double secs = since(t0);
    ok = ok && secs <= kOracleBudgetS;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "oracle equivalence over %zu seeds (err_rel_max <= %.2f, max_occupancy_err <= "
                  "%.2f, mean rel <= %.2f, global <= %.2f, gap <= (1-rho) dt); %.1f s (<= %.0f s)",
                  kOracleSeeds, kErrRelMax, kMaxOccupancy, kMeanRelOutflow, kGlobalRel, secs,
                  kOracleBudgetS);
    verdict(2, ok, buf);
    return tot;
}

// ---------------------------------------------------------------------------

void intensity_sweep() {
    auto cfg = app::parse_config(R"({"traffic": {"users": 10, "horizon": "6 h"},
        "queue": {"mu": "11.33 Mb/s"}, "solver": {"dt": 60}})");
    cfg.sweep.target_rho = kSweepRho;
    const auto pts = app::run_sweep(cfg);
    bool ok = pts.size() == kSweepRho.size();
    for (const auto& p : pts) {
        if (!p.report) {
            std::printf("    point %zu failed: %s\n", p.index, p.error.c_str());
            ok = false;
            continue;
        }
        const auto& r = *p.report;
        std::printf("    rho=%.3f logistic global=%.4f baseline global=%.4f\n", r.rho,
                    r.global_rel_err, r.baseline_global_rel_err);
        ok = ok && r.global_rel_err <= kSweepGlobalRel;
    }
    if (ok)
        for (std::size_t i = pts.size() - 2; i < pts.size(); ++i)
            ok = ok && pts[i].report->baseline_global_rel_err > pts[i].report->global_rel_err;
    verdict(3, ok,
            "intensity sweep: baseline global error > logistic at the two highest rho; "
            "logistic global error <= " +
                fmt("%.2f", kSweepGlobalRel) + " across the grid");
}

// ---------------------------------------------------------------------------

void asymptotic_bound() {
    const auto t0 = Clock::now();
    const double x_inf = 0.5, mu = 1.0, alpha = 0.5, q0 = 1.0, eps = 0.05;
    const double dt = 0.01;
    const RateSeries x{0.0, dt, std::vector<double>(6000, x_inf)};
    QueueSpec spec;
    spec.mu = mu;
    spec.alpha = alpha;
    spec.q0 = q0;
    SolverOptions opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 1e-12;
    const auto tr = integrate_queue(x, spec, opts);
    const double slack = 10 * (opts.abs_tol + opts.rel_tol * q0);
    bool below = true;
    double first_cross = -1.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.time_at(i);
        if (tr.q[i] > exponential_queue_bound(t, 0.0, q0, mu, x_inf, alpha) + slack) below = false;
        if (first_cross < 0.0 && tr.q[i] <= eps) first_cross = t;
    }
    const double t_bound = emptying_time_bound(0.0, q0, eps, mu, x_inf, alpha);
    const double secs = since(t0);
    const bool ok = below && first_cross >= 0.0 && first_cross <= t_bound + dt && secs < kBoundBudgetS;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "asymptotic bounds: q below exponential bound everywhere=%s; first q <= %.2f "
                  "at t=%.3f <= emptying bound %.3f; %.3f s (< %.0f s)",
                  below ? "yes" : "no", eps, first_cross, t_bound, secs, kBoundBudgetS);
    verdict(4, ok, buf);
}

// ---------------------------------------------------------------------------

void point_queue_limit() {
    const auto t0 = Clock::now();
    const double mu = 1.0, alpha = 1.0, dt = 0.05;
    RateSeries x{0.0, dt, std::vector<double>(800, 0.0)};
    for (std::size_t i = 0; i < 200; ++i) x.values[i] = 2.0 * mu;  // 10 s overload
    const auto pq = integrate_point_queue(x, mu, 0.0);
    SolverOptions opts;
    opts.rel_tol = 1e-9;
    opts.abs_tol = 1e-12;
    std::vector<double> dist;
    for (double a : {alpha, 10 * alpha, 100 * alpha}) {
        QueueSpec spec;
        spec.mu = mu;
        spec.alpha = a;
        const auto tr = integrate_queue(x, spec, opts);
        double d = 0.0;
        for (std::size_t i = 0; i < std::min(tr.size(), pq.size()); ++i)
            d = std::max(d, std::abs(tr.q[i] - pq.q[i]));
        dist.push_back(d);
    }
    const double secs = since(t0);
    const bool ok = dist[0] > dist[1] && dist[1] > dist[2] && secs < kPulseBudgetS;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "point-queue limit: sup |q_log - q_point| = %.4g, %.4g, %.4g for alpha x1, x10, "
                  "x100; %.3f s (< %.0f s)",
                  dist[0], dist[1], dist[2], secs, kPulseBudgetS);
    verdict(5, ok, buf);
}

// ---------------------------------------------------------------------------

void dt_scenario() {
    const auto t0 = Clock::now();
    auto cfg = app::parse_config(R"({"traffic": {"horizon": "1 d"},
        "network": {"users_per_flow": 10000, "flow_mean_rate": "12.5 Gb/s"}})");
    cfg.network->priority.rates = kPriorityRates;
    const auto run = app::run_dt(cfg);
    const double secs = since(t0);

    const auto& l = run.priority_l_max;
    bool monotone = true;
    for (std::size_t i = 1; i < l.size(); ++i) monotone = monotone && l[i] >= l[i - 1] * (1 - 1e-6);
    // L(18), L(20) sit at indices 4, 5.
    const double slope_before = (l[4] - l[0]) / 18.0;
    const double slope_after = (l[5] - l[4]) / 2.0;
    const bool superlinear = l[5] > l[4] && slope_after > slope_before;
    const bool in_band = run.l_max >= kLatencyLo && run.l_max <= kLatencyHi;
    std::printf("    L_max by priority rate [Gb/s -> s]:");
    for (std::size_t i = 0; i < l.size(); ++i)
        std::printf(" %g -> %.4g;", kPriorityRates[i] / 1e9, l[i]);
    std::printf("\n");
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "network scenario: L_max = %.4f s in [%.2f, %.2f]; priority L_max nondecreasing=%s; "
                  "slope past 18 Gb/s %.3g s per Gb/s vs %.3g before; %.1f s (<= %.0f s)",
                  run.l_max, kLatencyLo, kLatencyHi, monotone ? "yes" : "no", slope_after,
                  slope_before, secs, kDtBudgetS);
    verdict(6, in_band && monotone && superlinear && secs <= kDtBudgetS, buf);
}

// ---------------------------------------------------------------------------

void speedup(const OracleTotals& t) {
    const double ratio = t.fluid_s > 0.0 ? t.des_s / t.fluid_s : 0.0;
    const double with_binning = t.des_s / (t.fluid_s + t.binning_s);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "performance: DES %.3f s vs logistic %.5f s -> %.0fx (>= %.0fx); "
                  "counting inflow binning as well: %.1fx",
                  t.des_s, t.fluid_s, ratio, kSpeedup, with_binning);
    verdict(7, ratio >= kSpeedup, buf);
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    property_suite();
    const OracleTotals totals = oracle_equivalence();
    intensity_sweep();
    asymptotic_bound();
    point_queue_limit();
    dt_scenario();
    speedup(totals);
    std::printf("%d criteria failed; total %.1f s\n", failures, since(t0));
    return failures == 0 ? 0 : 1;
}
