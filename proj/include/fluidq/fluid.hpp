#pragma once

// Logistic queue model: a fluid queue whose outflow saturates smoothly with
// backlog,
//
//     q'(t) = X(t) - Y(t),   Y = mu + exp(-alpha q) (min(mu, X) - mu),
//
// together with its finite-buffer, variable-rate, multi-server, flow
// separation and priority variants. Queues are in bits, rates in bits/s and
// alpha in s/bit.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fluidq/traffic.hpp"

namespace fluidq {

// Piecewise linear signal through knots (first_knot + i*dt, values[i]),
// held constant outside the knot range.
class LinearSignal {
public:
    LinearSignal() = default;
    LinearSignal(double first_knot, double dt, std::vector<double> values);

    // Knot i of a RateSeries sits at the right edge of bin i.
    static LinearSignal from_series(const RateSeries& x);

    double operator()(double t) const;
    double max() const;
    double first_knot() const { return first_; }
    double dt() const { return dt_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double> knots() const;

private:
    double first_ = 0.0;
    double dt_ = 1.0;
    std::vector<double> values_;
};

// Service rate mu > 0: constant, a function of time, or a function of the
// queue size.
class ServiceRate {
public:
    enum class Kind { Constant, TimeVarying, QueueDependent };

    ServiceRate(double mu = 1.0);  // NOLINT: implicit from a constant rate

    static ServiceRate constant(double mu) { return ServiceRate(mu); }
    // `sup` is an upper bound of mu(t), used for range checks.
    static ServiceRate time_varying(std::function<double(double)> mu_of_t, double sup);
    static ServiceRate queue_dependent(std::function<double(double)> mu_of_q, double sup);
    // m servers of speed mu0 each, see multi_server_rate.
    static ServiceRate multi_server(double mu0, int servers);

    double at(double t, double q) const;
    Kind kind() const { return kind_; }
    // Constant value, or the declared supremum.
    double nominal() const { return value_; }

private:
    Kind kind_ = Kind::Constant;
    double value_ = 1.0;
    std::function<double(double)> fn_;
};

struct FiniteQueueParams {
    double h0;  // H(k), in (0, 1]
    double n;   // steepness, 1/bits
};

struct QueueSpec {
    ServiceRate mu;
    double alpha = 0.0;  // s/bit
    double q0 = 0.0;
    std::optional<double> capacity;                  // k, bits
    std::optional<FiniteQueueParams> finite_params;  // defaulted from inflow when unset

    void validate() const;
};

struct SolverOptions {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;  // bits
    double max_step = 0.0;  // 0: unlimited
    double output_dt = 0.0;  // 0: inflow dt
};

struct SolverStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double max_negative_q = 0.0;  // worst clamped excursion below zero, bits
};

// q, y, mu sampled on t0 + i*dt, i = 0..size()-1. `served` and `lost` are the
// cumulative departed and annihilated bits since t0.
struct QueueTrajectory {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> q;
    std::vector<double> y;
    std::vector<double> mu;
    std::vector<double> served;
    std::vector<double> lost;
    SolverStats stats;

    std::size_t size() const { return q.size(); }
    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double end_time() const { return time_at(size() - 1); }
    double max_q() const;
    double lost_bits() const { return lost.empty() ? 0.0 : lost.back(); }

    // Linear interpolation of q; throws HorizonError outside the grid.
    double q_at(double t) const;

    // Outflow as a RateSeries on the same convention as inflows: value i is
    // y at grid point i + 1.
    RateSeries outflow_series() const;
};

// Y = mu + exp(-alpha q) (min(mu, x) - mu). Throws DomainError on negative
// x, q or nonpositive mu, alpha.
double outflow_rate(double x, double q, double mu, double alpha);

// Unchecked variant; mu may be 0 (a fully starved server).
inline double logistic_outflow(double x, double q, double mu, double alpha);

// Right-hand side of the logistic ODE; small negative q is read as 0.
double logistic_rhs(double t, double q, const LinearSignal& inflow, const ServiceRate& mu,
                    double alpha);

// Vickrey point queue: X - min(mu, X) at q = 0, X - mu otherwise, projected
// so an empty queue never decreases.
double point_queue_rhs(double t, double q, const LinearSignal& inflow, double mu);

// alpha = rho / mu = lambda / mu^2. Throws DomainError when lambda = 0.
double compute_alpha(const RateSeries& inflow, double mu);

double exit_time(double t, double q, double mu);

// Exit times along a trajectory, Lambda_i = t_i + q_i / mu_i.
std::vector<double> exit_times(const QueueTrajectory& traj);

// Upper bound on the time to drain from q_x (at t_x) down to eps under an
// inflow bounded by x_inf < mu.
double emptying_time_bound(double t_x, double q_x, double eps, double mu, double x_inf,
                           double alpha);

// q(t) <= q_x exp(alpha (q_x - (mu - x_inf)(t - t_x))) for t >= t_x.
double exponential_queue_bound(double t, double t_x, double q_x, double mu, double x_inf,
                               double alpha);

// Logistic approximation of the buffer gate, H(k) = h0.
double heaviside_smooth(double q, double k, double h0, double n);

// Default gate: h0 = min(1, mu / max X), n = 500 / k.
FiniteQueueParams default_finite_params(double mu, double max_inflow, double k);

// m servers of speed mu0: mu0 (1 + q) below m - 1, mu0 m above.
double multi_server_rate(double q, double mu0, int servers);

// Shares Y among components in proportion to X_i / X. Bins with X below
// 1e-12 get 0 for every component.
std::vector<RateSeries> split_outflow(std::span<const RateSeries> components,
                                      const RateSeries& total_out);

QueueTrajectory integrate_queue(const LinearSignal& inflow, double t0, double t1,
                                const QueueSpec& spec, const SolverOptions& opts);
QueueTrajectory integrate_queue(const RateSeries& inflow, const QueueSpec& spec,
                                const SolverOptions& opts = {});

// Finite buffer of capacity spec.capacity. Gate parameters default from the
// inflow maximum when spec.finite_params is unset. Throws ParameterError if
// q0 >= k.
QueueTrajectory integrate_finite_queue(const RateSeries& inflow, const QueueSpec& spec,
                                       const SolverOptions& opts = {});

// Reference point-queue trajectory for a constant mu, integrated exactly
// piece by piece on the linear inflow.
QueueTrajectory integrate_point_queue(const RateSeries& inflow, double mu, double q0,
                                      double output_dt = 0.0);

struct PriorityTrajectories {
    QueueTrajectory high;  // served first; mu field holds mu1(t)
    QueueTrajectory low;   // mu field holds mu2(t)
};

// Two flows sharing a server of rate mu, x_high having priority. The low
// priority share is mu2 = (X2 / X) mu exp(-alpha q1), mu1 = mu - mu2.
PriorityTrajectories integrate_priority_pair(const RateSeries& x_high, const RateSeries& x_low,
                                             double mu, double alpha, double q0_high,
                                             double q0_low, const SolverOptions& opts = {});

// Share of the server given to the low-priority flow.
double priority_low_rate(double x_high, double x_low, double q_high, double mu, double alpha);

// ---------------------------------------------------------------------------

inline double logistic_outflow(double x, double q, double mu, double alpha) {
    // Same as mu + e^{-alpha q} (m - mu), written so Y >= m holds in floating point.
    const double m = x < mu ? x : mu;
    return m - std::expm1(-alpha * q) * (mu - m);
}

}  // namespace fluidq
