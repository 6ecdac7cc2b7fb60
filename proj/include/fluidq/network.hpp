#pragma once

// Two-tier digital twin: n access links o_i -> O, one core link O -> D with a
// finite buffer, and m egress links D -> d_j. Each link is a logistic queue;
// end-to-end latency is read off the queue trajectories.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fluidq/fluid.hpp"
#include "fluidq/traffic.hpp"

namespace fluidq {

// Rate used for the O -> D transit time when locating t_d.
enum class TransitDivisor { Core, Access };

struct Topology {
    std::vector<double> access_rates;  // mu_i, bits/s
    double core_rate = 0.0;            // mu, bits/s
    double core_capacity = 0.0;        // k, bits
    std::optional<FiniteQueueParams> core_gate;
    std::vector<double> egress_rates;               // xi_j, bits/s
    std::vector<std::vector<double>> routing;       // p, n x m, row-stochastic
    double packet_size_bits = 0.0;                  // s
    TransitDivisor transit_divisor = TransitDivisor::Core;

    // Per-link alpha overrides; unset entries use compute_alpha on the link inflow.
    std::vector<std::optional<double>> access_alpha;
    std::optional<double> core_alpha;
    std::vector<std::optional<double>> egress_alpha;

    // Where the outflow of an injected priority flow goes after D. Empty: it
    // terminates at D. Otherwise one weight per destination, summing to 1.
    std::vector<double> priority_egress_share;

    std::size_t origins() const { return access_rates.size(); }
    std::size_t destinations() const { return egress_rates.size(); }

    // Throws ParameterError.
    void validate() const;
};

struct DtState {
    std::vector<QueueTrajectory> access;  // q_i^o
    QueueTrajectory core;                 // q (the non-priority queue when a priority flow is set)
    std::vector<QueueTrajectory> egress;  // q_j^d

    std::vector<RateSeries> access_out;  // Y_i
    RateSeries core_in;                  // Y
    RateSeries core_out;                 // Z
    std::vector<RateSeries> egress_in;   // Z_j
    std::vector<RateSeries> egress_out;

    std::optional<QueueTrajectory> priority_core;  // q_1 of the priority pair
    std::optional<RateSeries> priority_in;
    std::optional<RateSeries> priority_out;
};

DtState propagate(const Topology& topo, std::span<const RateSeries> inflows,
                  const SolverOptions& opts = {});

// Same pipeline, with the core solved as a priority pair: the injected flow
// has priority over the aggregate of the access outflows.
DtState inject_priority_flow(const Topology& topo, std::span<const RateSeries> inflows,
                             const RateSeries& priority_inflow, const SolverOptions& opts = {});

// L_ij(t). Throws HorizonError when t, t_o or t_d fall outside the trajectories.
double latency(double t, std::size_t i, std::size_t j, const DtState& state,
               const Topology& topo);

// L_od(t): unweighted mean of L_ij over all origin/destination pairs.
double expected_latency(double t, const DtState& state, const Topology& topo);

struct LatencySeries {
    std::vector<double> t;
    std::vector<double> l_od;
};

// L_od on the trajectory grid, clipped to the instants where every t_d stays
// inside the simulated horizon.
LatencySeries expected_latency_series(const DtState& state, const Topology& topo);

// max_t L_od(t) over the clipped window. Throws HorizonError if it is empty.
double max_expected_latency(const DtState& state, const Topology& topo);

}  // namespace fluidq
