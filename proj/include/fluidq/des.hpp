#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fluidq/traffic.hpp"

namespace fluidq {

struct DesConfig {
    double mu = 1.0;                  // bits/s
    std::optional<double> capacity;   // bits; drop-tail when backlog + size > k
    double sample_dt = 1.0;           // seconds

    void validate() const;
};

struct DesResult {
    double t0 = 0.0;
    double sample_dt = 1.0;
    // Backlog at t0 + i * sample_dt, including the unserved part of the packet
    // in service.
    std::vector<double> q_sampled;
    // Completion times; horizon extends to the last completion.
    PacketTrace departures;
    std::size_t dropped_packets = 0;
    double dropped_bits = 0.0;
    // Arrival index of each departure (FIFO audit).
    std::vector<std::size_t> departure_source;

    double sample_time(std::size_t i) const { return t0 + static_cast<double>(i) * sample_dt; }
};

// Single-server FIFO queue driven by an event calendar. Throws InputError on
// an unsorted trace.
DesResult simulate_fifo(const PacketTrace& trace, const DesConfig& cfg);

// Departures binned exactly like trace_to_inflow, restricted to `horizon`
// when given (departures after its end are not counted).
RateSeries departures_to_outflow(const DesResult& result, double dt,
                                 std::optional<Horizon> horizon = std::nullopt);

}  // namespace fluidq
