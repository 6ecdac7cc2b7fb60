#include "fluidq/des.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <string>

#include "fluidq/error.hpp"

namespace fluidq {

void DesConfig::validate() const {
    if (!(mu > 0.0)) throw ParameterError("DES: mu must be positive");
    if (!(sample_dt > 0.0)) throw ParameterError("DES: sample_dt must be positive");
    if (capacity && !(*capacity > 0.0)) throw ParameterError("DES: capacity must be positive");
}

namespace {

// Tie order at equal times: arrivals, then departures, then samples.
enum class EventKind : std::uint8_t { Arrival = 0, Departure = 1, Sample = 2 };

struct Event {
    double t;
    EventKind kind;
    std::size_t index;  // packet index or sample index

    bool operator>(const Event& o) const {
        if (t != o.t) return t > o.t;
        return kind > o.kind;
    }
};

}  // namespace

DesResult simulate_fifo(const PacketTrace& trace, const DesConfig& cfg) {
    cfg.validate();
    for (std::size_t i = 1; i < trace.events.size(); ++i)
        if (trace.events[i].t < trace.events[i - 1].t)
            throw InputError("simulate_fifo: trace not sorted at event " + std::to_string(i));

    const auto& pk = trace.events;
    const double t0 = trace.horizon.t0;
    const double t1 = trace.horizon.t1;
    const std::size_t n_samples =
        static_cast<std::size_t>(std::floor((t1 - t0) / cfg.sample_dt + 1e-9)) + 1;

    DesResult res;
    res.t0 = t0;
    res.sample_dt = cfg.sample_dt;
    res.q_sampled.reserve(n_samples);
    res.departures.events.reserve(pk.size());
    res.departure_source.reserve(pk.size());

    std::priority_queue<Event, std::vector<Event>, std::greater<>> calendar;
    if (!pk.empty()) calendar.push({pk.front().t, EventKind::Arrival, 0});
    calendar.push({t0, EventKind::Sample, 0});

    std::deque<std::size_t> waiting;
    double waiting_bits = 0.0;
    bool busy = false;
    double completion = 0.0;

    auto start_service = [&](std::size_t j, double now) {
        busy = true;
        completion = now + pk[j].size_bits / cfg.mu;
        calendar.push({completion, EventKind::Departure, j});
    };
    auto backlog = [&](double now) {
        return waiting_bits + (busy ? (completion - now) * cfg.mu : 0.0);
    };

    while (!calendar.empty()) {
        const Event ev = calendar.top();
        calendar.pop();
        switch (ev.kind) {
            case EventKind::Arrival: {
                const std::size_t j = ev.index;
                if (j + 1 < pk.size()) calendar.push({pk[j + 1].t, EventKind::Arrival, j + 1});
                const double s = pk[j].size_bits;
                if (cfg.capacity && backlog(ev.t) + s > *cfg.capacity) {
                    ++res.dropped_packets;
                    res.dropped_bits += s;
                    break;
                }
                if (!busy) {
                    start_service(j, ev.t);
                } else {
                    waiting.push_back(j);
                    waiting_bits += s;
                }
                break;
            }
            case EventKind::Departure: {
                res.departures.events.push_back({ev.t, pk[ev.index].size_bits});
                res.departure_source.push_back(ev.index);
                busy = false;
                if (!waiting.empty()) {
                    const std::size_t j = waiting.front();
                    waiting.pop_front();
                    waiting_bits -= pk[j].size_bits;
                    if (waiting.empty()) waiting_bits = 0.0;
                    start_service(j, ev.t);
                }
                break;
            }
            case EventKind::Sample: {
                res.q_sampled.push_back(backlog(ev.t));
                const std::size_t next = ev.index + 1;
                if (next < n_samples)
                    calendar.push({t0 + static_cast<double>(next) * cfg.sample_dt,
                                   EventKind::Sample, next});
                break;
            }
        }
    }

    const double last = res.departures.events.empty() ? t1 : res.departures.events.back().t;
    res.departures.horizon = {t0, std::max(t1, last)};
    return res;
}

RateSeries departures_to_outflow(const DesResult& result, double dt,
                                 std::optional<Horizon> horizon) {
    const Horizon h = horizon ? *horizon : result.departures.horizon;
    RateBinner binner(h, dt);
    for (const auto& e : result.departures.events) {
        if (e.t > h.t1) break;
        binner.add(e.t, e.size_bits);
    }
    return binner.finish();
}

}  // namespace fluidq
