#include "fluidq/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fluidq/error.hpp"
#include "fluidq/ode.hpp"

namespace fluidq {

namespace {

// Aggregate rates below this are treated as "no traffic" when forming shares.
constexpr double kZeroRate = 1e-12;

std::size_t grid_points(double t0, double t1, double dt) {
    return static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
}

std::vector<double> grid_times(double t0, double dt, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = t0 + static_cast<double>(i) * dt;
    return out;
}

ode::Options to_ode_options(const SolverOptions& o) {
    if (!(o.rel_tol > 0.0) || !(o.abs_tol > 0.0))
        throw ParameterError("solver tolerances must be positive");
    ode::Options out;
    out.rel_tol = o.rel_tol;
    out.abs_tol = o.abs_tol;
    if (o.max_step > 0.0) out.max_step = o.max_step;
    return out;
}

void check_excursion(const QueueTrajectory& traj, const SolverOptions& opts) {
    const double allowed = 1e-6 * traj.max_q() + 10.0 * opts.abs_tol;
    if (traj.stats.max_negative_q > allowed)
        throw IntegrationError("queue went negative by " +
                                   std::to_string(traj.stats.max_negative_q) + " bits",
                               traj.t0);
}

}  // namespace

// --- LinearSignal ----------------------------------------------------------

LinearSignal::LinearSignal(double first_knot, double dt, std::vector<double> values)
    : first_(first_knot), dt_(dt), values_(std::move(values)) {
    if (!(dt_ > 0.0)) throw ParameterError("LinearSignal: dt must be positive");
}

LinearSignal LinearSignal::from_series(const RateSeries& x) {
    return LinearSignal(x.t0 + x.dt, x.dt, x.values);
}

double LinearSignal::operator()(double t) const {
    if (values_.empty()) return 0.0;
    const double pos = (t - first_) / dt_;
    if (pos <= 0.0) return values_.front();
    const auto last = static_cast<double>(values_.size() - 1);
    if (pos >= last) return values_.back();
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

double LinearSignal::max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

std::vector<double> LinearSignal::knots() const {
    return grid_times(first_, dt_, values_.size());
}

// --- ServiceRate -----------------------------------------------------------

ServiceRate::ServiceRate(double mu) : kind_(Kind::Constant), value_(mu) {}

ServiceRate ServiceRate::time_varying(std::function<double(double)> mu_of_t, double sup) {
    ServiceRate r(sup);
    r.kind_ = Kind::TimeVarying;
    r.fn_ = std::move(mu_of_t);
    return r;
}

ServiceRate ServiceRate::queue_dependent(std::function<double(double)> mu_of_q, double sup) {
    ServiceRate r(sup);
    r.kind_ = Kind::QueueDependent;
    r.fn_ = std::move(mu_of_q);
    return r;
}

ServiceRate ServiceRate::multi_server(double mu0, int servers) {
    if (!(mu0 > 0.0) || servers < 1) throw ParameterError("multi_server: need mu0 > 0, m >= 1");
    return queue_dependent([mu0, servers](double q) { return multi_server_rate(q, mu0, servers); },
                           mu0 * servers);
}

double ServiceRate::at(double t, double q) const {
    switch (kind_) {
        case Kind::TimeVarying:
            return fn_(t);
        case Kind::QueueDependent:
            return fn_(q);
        case Kind::Constant:
            break;
    }
    return value_;
}

void QueueSpec::validate() const {
    if (!(mu.nominal() > 0.0)) throw ParameterError("mu must be positive");
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    if (!(q0 >= 0.0)) throw ParameterError("q0 must be >= 0");
    if (capacity) {
        if (!(*capacity > 0.0)) throw ParameterError("capacity must be positive");
        if (!(q0 < *capacity)) throw ParameterError("q0 must be below capacity");
    }
    if (finite_params) {
        if (!(finite_params->h0 > 0.0 && finite_params->h0 <= 1.0))
            throw ParameterError("H0 must lie in (0, 1]");
        if (!(finite_params->n > 0.0)) throw ParameterError("gate steepness n must be positive");
    }
}

// --- QueueTrajectory -------------------------------------------------------

double QueueTrajectory::max_q() const {
    return q.empty() ? 0.0 : *std::max_element(q.begin(), q.end());
}

double QueueTrajectory::q_at(double t) const {
    if (q.empty()) throw HorizonError("empty trajectory");
    const double pos = (t - t0) / dt;
    const auto last = static_cast<double>(q.size() - 1);
    if (pos < -1e-9 || pos > last + 1e-9)
        throw HorizonError("time " + std::to_string(t) + " outside trajectory");
    if (pos <= 0.0) return q.front();
    if (pos >= last) return q.back();
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return q[i] + w * (q[i + 1] - q[i]);
}

RateSeries QueueTrajectory::outflow_series() const {
    RateSeries s{t0, dt, {}};
    if (y.size() > 1) s.values.assign(y.begin() + 1, y.end());
    return s;
}

// --- Pointwise laws --------------------------------------------------------

double outflow_rate(double x, double q, double mu, double alpha) {
    if (x < 0.0 || q < 0.0) throw DomainError("outflow_rate: x and q must be >= 0");
    if (!(mu > 0.0) || !(alpha > 0.0))
        throw DomainError("outflow_rate: mu and alpha must be positive");
    return logistic_outflow(x, q, mu, alpha);
}

double logistic_rhs(double t, double q, const LinearSignal& inflow, const ServiceRate& mu,
                    double alpha) {
    const double qe = std::max(q, 0.0);
    const double x = inflow(t);
    return x - logistic_outflow(x, qe, mu.at(t, qe), alpha);
}

double point_queue_rhs(double t, double q, const LinearSignal& inflow, double mu) {
    const double x = inflow(t);
    if (q > 0.0) return x - mu;
    return std::max(0.0, x - std::min(mu, x));
}

double compute_alpha(const RateSeries& inflow, double mu) {
    if (!(mu > 0.0)) throw ParameterError("compute_alpha: mu must be positive");
    const double lambda = mean_rate(inflow);
    if (!(lambda > 0.0))
        throw DomainError("compute_alpha: zero mean inflow, alpha must be given explicitly");
    return lambda / (mu * mu);
}

double exit_time(double t, double q, double mu) {
    if (!(mu > 0.0)) throw DomainError("exit_time: mu must be positive");
    if (q < 0.0) throw DomainError("exit_time: q must be >= 0");
    return t + q / mu;
}

std::vector<double> exit_times(const QueueTrajectory& traj) {
    std::vector<double> out(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        out[i] = traj.time_at(i) + traj.q[i] / traj.mu[i];
    return out;
}

double emptying_time_bound(double t_x, double q_x, double eps, double mu, double x_inf,
                           double alpha) {
    if (!(x_inf < mu)) throw DomainError("emptying_time_bound: unbounded for X_inf >= mu");
    if (!(eps > 0.0) || eps > q_x) throw DomainError("emptying_time_bound: need 0 < eps <= q_X");
    if (!(alpha > 0.0) || x_inf < 0.0) throw DomainError("emptying_time_bound: bad alpha/X_inf");
    const double beta = mu - x_inf;
    return t_x + (q_x - eps) / beta + std::log(q_x / eps) / (alpha * beta);
}

double exponential_queue_bound(double t, double t_x, double q_x, double mu, double x_inf,
                               double alpha) {
    const double beta = mu - x_inf;
    return q_x * std::exp(alpha * (q_x - beta * (t - t_x)));
}

double heaviside_smooth(double q, double k, double h0, double n) {
    if (!(h0 > 0.0 && h0 <= 1.0)) throw ParameterError("heaviside_smooth: H0 must be in (0, 1]");
    if (!(k > 0.0) || !(n > 0.0)) throw ParameterError("heaviside_smooth: k and n must be > 0");
    const double a = 1.0 / h0 - 1.0;
    if (a == 0.0) return 1.0;
    const double z = n * (q - k);
    if (z > 700.0) return 0.0;
    return 1.0 / (1.0 + a * std::exp(z));
}

FiniteQueueParams default_finite_params(double mu, double max_inflow, double k) {
    const double h0 = max_inflow > mu ? mu / max_inflow : 1.0;
    return {h0, 500.0 / k};
}

double multi_server_rate(double q, double mu0, int servers) {
    const double m = static_cast<double>(servers);
    return q >= m - 1.0 ? mu0 * m : mu0 * (1.0 + q);
}

std::vector<RateSeries> split_outflow(std::span<const RateSeries> components,
                                      const RateSeries& total_out) {
    const std::size_t n = total_out.size();
    for (const auto& c : components)
        if (c.size() != n || c.t0 != total_out.t0 || c.dt != total_out.dt)
            throw InputError("split_outflow: grid mismatch");
    std::vector<RateSeries> out(components.size(),
                                RateSeries{total_out.t0, total_out.dt, std::vector<double>(n)});
    for (std::size_t i = 0; i < n; ++i) {
        double x = 0.0;
        for (const auto& c : components) x += c.values[i];
        if (x < kZeroRate) continue;
        const double ratio = total_out.values[i] / x;
        for (std::size_t k = 0; k < components.size(); ++k)
            out[k].values[i] = ratio * components[k].values[i];
    }
    return out;
}

double priority_low_rate(double x_high, double x_low, double q_high, double mu, double alpha) {
    const double x = x_high + x_low;
    if (x < kZeroRate) return 0.0;
    return (x_low / x) * mu * std::exp(-alpha * std::max(q_high, 0.0));
}

// --- Integration -----------------------------------------------------------

namespace {

struct Sample {
    double x_eff;  // inflow after the buffer gate
    double mu;
    double y;
};

// Drives the 3-state system (q, served, lost) for one queue. `model(t, q)`
// returns the raw inflow and the gated sample.
template <class Model>
QueueTrajectory run_single(const LinearSignal& inflow, double t0, double t1, double q0,
                           const SolverOptions& opts, Model&& model,
                           double q_cap = std::numeric_limits<double>::infinity()) {
    if (!(t1 > t0)) throw ParameterError("integration window is empty");
    const double odt = opts.output_dt > 0.0 ? opts.output_dt : inflow.dt();
    QueueTrajectory traj;
    traj.t0 = t0;
    traj.dt = odt;
    const std::size_t n = grid_points(t0, t1, odt);
    traj.q.reserve(n);
    traj.y.reserve(n);
    traj.mu.reserve(n);
    traj.served.reserve(n);
    traj.lost.reserve(n);
    const auto outputs = grid_times(t0, odt, n);
    const auto knots = inflow.knots();

    double worst = 0.0;
    auto rhs = [&](double t, const ode::State<3>& s, ode::State<3>& ds) {
        const double q = std::max(s[0], 0.0);
        double x = 0.0;
        const Sample smp = model(t, q, x);
        ds[0] = smp.x_eff - smp.y;
        ds[1] = smp.y;
        ds[2] = x - smp.x_eff;
    };
    auto on_output = [&](double t, const ode::State<3>& s) {
        worst = std::max(worst, -s[0]);
        const double q = std::max(s[0], 0.0);
        double x = 0.0;
        const Sample smp = model(t, q, x);
        traj.q.push_back(q);
        traj.y.push_back(smp.y);
        traj.mu.push_back(smp.mu);
        traj.served.push_back(s[1]);
        traj.lost.push_back(s[2]);
    };
    auto on_step = [&](double, const ode::State<3>& s) { worst = std::max(worst, -s[0]); };

    // A finite buffer never fills past k; steps that jump over the gate are redone.
    const double cap = q_cap * (1.0 + 0.5 * opts.rel_tol) + opts.abs_tol;
    auto admissible = [cap](const ode::State<3>& s) { return s[0] <= cap; };
    const auto st = ode::integrate<3>(rhs, t0, t1, ode::State<3>{q0, 0.0, 0.0}, knots, outputs,
                                      on_output, on_step, to_ode_options(opts), admissible);
    traj.stats = {st.steps, st.rejected, st.rhs_evals, worst};
    check_excursion(traj, opts);
    return traj;
}

}  // namespace

QueueTrajectory integrate_queue(const LinearSignal& inflow, double t0, double t1,
                                const QueueSpec& spec, const SolverOptions& opts) {
    spec.validate();
    const double alpha = spec.alpha;
    const ServiceRate& rate = spec.mu;

    if (!spec.capacity) {
        return run_single(inflow, t0, t1, spec.q0, opts, [&](double t, double q, double& x) {
            x = inflow(t);
            const double mu = rate.at(t, q);
            return Sample{x, mu, logistic_outflow(x, q, mu, alpha)};
        });
    }

    const double k = *spec.capacity;
    const FiniteQueueParams gate =
        spec.finite_params ? *spec.finite_params
                           : default_finite_params(rate.nominal(), inflow.max(), k);
    const double a = 1.0 / gate.h0 - 1.0;
    return run_single(inflow, t0, t1, spec.q0, opts, [&](double t, double q, double& x) {
        x = inflow(t);
        const double z = gate.n * (q - k);
        const double h = a == 0.0 ? 1.0 : (z > 700.0 ? 0.0 : 1.0 / (1.0 + a * std::exp(z)));
        const double xh = h * x;
        const double mu = rate.at(t, q);
        return Sample{xh, mu, logistic_outflow(xh, q, mu, alpha)};
    }, k);
}

QueueTrajectory integrate_queue(const RateSeries& inflow, const QueueSpec& spec,
                                const SolverOptions& opts) {
    if (inflow.empty()) throw InputError("integrate_queue: empty inflow");
    return integrate_queue(LinearSignal::from_series(inflow), inflow.t0, inflow.end_time(), spec,
                           opts);
}

QueueTrajectory integrate_finite_queue(const RateSeries& inflow, const QueueSpec& spec,
                                       const SolverOptions& opts) {
    if (!spec.capacity) throw ParameterError("integrate_finite_queue: capacity not set");
    if (!(spec.q0 < *spec.capacity))
        throw ParameterError("integrate_finite_queue: q0 must be below capacity");
    return integrate_queue(inflow, spec, opts);
}

QueueTrajectory integrate_point_queue(const RateSeries& inflow, double mu, double q0,
                                      double output_dt) {
    if (inflow.empty()) throw InputError("integrate_point_queue: empty inflow");
    if (!(mu > 0.0)) throw ParameterError("integrate_point_queue: mu must be positive");
    if (q0 < 0.0) throw ParameterError("integrate_point_queue: q0 must be >= 0");
    const LinearSignal x = LinearSignal::from_series(inflow);
    const double t0 = inflow.t0;
    const double t1 = inflow.end_time();
    const double odt = output_dt > 0.0 ? output_dt : inflow.dt;

    QueueTrajectory traj;
    traj.t0 = t0;
    traj.dt = odt;
    const std::size_t n = grid_points(t0, t1, odt);
    const auto outputs = grid_times(t0, odt, n);

    // Piece boundaries: window ends and inflow knots. Inside a piece X - mu is
    // linear, so the queue is a quadratic in time until it hits zero.
    std::vector<double> bounds{t0};
    for (double k : x.knots())
        if (k > t0 && k < t1) bounds.push_back(k);
    bounds.push_back(t1);

    double q = q0;
    double served = 0.0;
    std::size_t next_out = 0;

    auto emit = [&](double t, double qv, double sv) {
        const double xv = x(t);
        traj.q.push_back(qv);
        traj.y.push_back(qv > 0.0 ? mu : std::min(mu, xv));
        traj.mu.push_back(mu);
        traj.served.push_back(sv);
        traj.lost.push_back(0.0);
    };

    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        double a = bounds[b];
        const double end = bounds[b + 1];
        // Split where X crosses mu so g = X - mu keeps one sign per sub-piece.
        std::vector<double> sub{a};
        const double ga = x(a) - mu, gb = x(end) - mu;
        if (ga * gb < 0.0) sub.push_back(a + (end - a) * ga / (ga - gb));
        sub.push_back(end);

        for (std::size_t s = 0; s + 1 < sub.size(); ++s) {
            const double lo = sub[s], hi = sub[s + 1];
            const double g0 = x(lo) - mu;
            const double slope = (x(hi) - x(lo)) / (hi - lo);
            const double gmid = x(0.5 * (lo + hi)) - mu;
            const bool draining = gmid < 0.0 || (gmid == 0.0 && g0 < 0.0);
            const double x0 = x(lo);
            const double q_start = q, s_start = served;

            // Served bits: mu while backlogged, X once empty. With g < 0 the
            // queue empties at most once (at tau_empty); with g >= 0 the
            // server runs at mu throughout.
            double tau_empty = std::numeric_limits<double>::infinity();
            if (draining) {
                if (q_start <= 0.0) {
                    tau_empty = 0.0;
                } else {
                    // Solve q_start + g0 tau + slope tau^2 / 2 = 0 for the
                    // smallest positive root.
                    const double A = 0.5 * slope, B = g0, C = q_start;
                    if (std::abs(A) < 1e-300) {
                        if (B < 0.0) tau_empty = -C / B;
                    } else {
                        const double disc = B * B - 4.0 * A * C;
                        if (disc >= 0.0) {
                            const double sq = std::sqrt(disc);
                            const double qq = -0.5 * (B + (B >= 0 ? sq : -sq));
                            double r1 = qq / A, r2 = C / qq;
                            if (r1 > r2) std::swap(r1, r2);
                            if (r1 > 0.0) tau_empty = r1;
                            else if (r2 > 0.0) tau_empty = r2;
                        }
                    }
                }
            }

            auto arrived = [&](double tau) { return x0 * tau + 0.5 * slope * tau * tau; };
            auto state_at = [&](double tau, double& qv, double& sv) {
                const double growth = g0 * tau + 0.5 * slope * tau * tau;
                if (!draining) {
                    qv = std::max(0.0, q_start + growth);
                    sv = s_start + mu * tau;
                    return;
                }
                const double te = std::min(tau, tau_empty);
                qv = tau < tau_empty ? std::max(0.0, q_start + growth) : 0.0;
                sv = s_start + mu * te + (arrived(tau) - arrived(te));
            };

            while (next_out < outputs.size() && outputs[next_out] <= hi) {
                double qv, sv;
                state_at(outputs[next_out] - lo, qv, sv);
                emit(outputs[next_out], qv, sv);
                ++next_out;
            }
            state_at(hi - lo, q, served);
        }
    }
    while (next_out < outputs.size()) emit(outputs[next_out++], q, served);
    return traj;
}

PriorityTrajectories integrate_priority_pair(const RateSeries& x_high, const RateSeries& x_low,
                                             double mu, double alpha, double q0_high,
                                             double q0_low, const SolverOptions& opts) {
    if (x_high.size() != x_low.size() || x_high.t0 != x_low.t0 || x_high.dt != x_low.dt)
        throw InputError("integrate_priority_pair: grid mismatch");
    if (x_high.empty()) throw InputError("integrate_priority_pair: empty inflow");
    if (!(mu > 0.0) || !(alpha > 0.0))
        throw ParameterError("integrate_priority_pair: mu and alpha must be positive");
    if (q0_high < 0.0 || q0_low < 0.0)
        throw ParameterError("integrate_priority_pair: initial queues must be >= 0");

    const LinearSignal x1 = LinearSignal::from_series(x_high);
    const LinearSignal x2 = LinearSignal::from_series(x_low);
    const double t0 = x_high.t0, t1 = x_high.end_time();
    const double odt = opts.output_dt > 0.0 ? opts.output_dt : x_high.dt;
    const std::size_t n = grid_points(t0, t1, odt);
    const auto outputs = grid_times(t0, odt, n);

    PriorityTrajectories out;
    for (QueueTrajectory* tr : {&out.high, &out.low}) {
        tr->t0 = t0;
        tr->dt = odt;
    }

    struct Eval {
        double x1, x2, mu1, mu2, y1, y2;
    };
    auto eval = [&](double t, double q1, double q2) {
        Eval e;
        e.x1 = x1(t);
        e.x2 = x2(t);
        e.mu2 = priority_low_rate(e.x1, e.x2, q1, mu, alpha);
        e.mu1 = mu - e.mu2;
        e.y1 = logistic_outflow(e.x1, q1, e.mu1, alpha);
        e.y2 = logistic_outflow(e.x2, q2, e.mu2, alpha);
        return e;
    };

    double worst = 0.0;
    auto rhs = [&](double t, const ode::State<4>& s, ode::State<4>& ds) {
        const Eval e = eval(t, std::max(s[0], 0.0), std::max(s[1], 0.0));
        ds[0] = e.x1 - e.y1;
        ds[1] = e.x2 - e.y2;
        ds[2] = e.y1;
        ds[3] = e.y2;
    };
    auto on_output = [&](double t, const ode::State<4>& s) {
        worst = std::max({worst, -s[0], -s[1]});
        const double q1 = std::max(s[0], 0.0), q2 = std::max(s[1], 0.0);
        const Eval e = eval(t, q1, q2);
        out.high.q.push_back(q1);
        out.high.y.push_back(e.y1);
        out.high.mu.push_back(e.mu1);
        out.high.served.push_back(s[2]);
        out.high.lost.push_back(0.0);
        out.low.q.push_back(q2);
        out.low.y.push_back(e.y2);
        out.low.mu.push_back(e.mu2);
        out.low.served.push_back(s[3]);
        out.low.lost.push_back(0.0);
    };
    auto on_step = [&](double, const ode::State<4>& s) { worst = std::max({worst, -s[0], -s[1]}); };

    const auto st = ode::integrate<4>(rhs, t0, t1, ode::State<4>{q0_high, q0_low, 0.0, 0.0},
                                      x1.knots(), outputs, on_output, on_step,
                                      to_ode_options(opts));
    const SolverStats stats{st.steps, st.rejected, st.rhs_evals, worst};
    out.high.stats = stats;
    out.low.stats = stats;
    check_excursion(out.high, opts);
    check_excursion(out.low, opts);
    return out;
}

}  // namespace fluidq
