#include "fluidq/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <thread>

#include "fluidq/error.hpp"

namespace fluidq {

double VideoUserParams::burst_size_std() const {
    return dispersion_kind == DispersionKind::StdDev ? burst_size_dispersion
                                                     : std::sqrt(burst_size_dispersion);
}

double VideoUserParams::mean_session_s() const {
    double m = 0.0;
    for (const auto& s : session_lengths) m += s.duration_s * s.probability;
    return m;
}

void VideoUserParams::validate() const {
    if (packet_size_bits == 0) throw ParameterError("packet_size_bits must be positive");
    if (!(burst_size_mean > 0.0)) throw ParameterError("burst_size_mean must be positive");
    if (!(burst_size_dispersion > 0.0))
        throw ParameterError("burst_size_dispersion must be positive");
    if (!(interburst_mean_s > 0.0)) throw ParameterError("interburst_mean_s must be positive");
    if (!(interpacket_mean_s > 0.0)) throw ParameterError("interpacket_mean_s must be positive");
    if (!(interuse_mean_s > 0.0)) throw ParameterError("interuse_mean_s must be positive");
    if (session_lengths.empty()) throw ParameterError("session_lengths is empty");
    double total = 0.0;
    for (const auto& s : session_lengths) {
        if (!(s.duration_s >= 0.0)) throw ParameterError("session duration must be >= 0");
        if (!(s.probability >= 0.0)) throw ParameterError("session probability must be >= 0");
        total += s.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ParameterError("session probabilities sum to " + std::to_string(total) +
                             ", expected 1");
}

double expected_user_rate(const VideoUserParams& p) {
    const double burst_bits = p.burst_size_mean * static_cast<double>(p.packet_size_bits);
    const double cycle = (p.burst_size_mean - 1.0) * p.interpacket_mean_s + p.interburst_mean_s;
    const double on_rate = burst_bits / cycle;
    const double session = p.mean_session_s();
    return on_rate * session / (session + p.interuse_mean_s);
}

double PacketTrace::total_bits() const {
    double total = 0.0;
    for (const auto& e : events) total += e.size_bits;
    return total;
}

void PacketTrace::validate() const {
    if (!(horizon.t1 >= horizon.t0)) throw InputError("trace horizon is reversed");
    double prev = horizon.t0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.t < prev)
            throw InputError("trace not sorted or before horizon at event " + std::to_string(i));
        if (e.t > horizon.t1) throw InputError("event " + std::to_string(i) + " beyond horizon");
        if (!(e.size_bits > 0.0))
            throw InputError("event " + std::to_string(i) + " has nonpositive size");
        prev = e.t;
    }
}

double RateSeries::integral() const {
    if (values.empty()) return 0.0;
    double acc = values.front() * dt;
    for (std::size_t i = 1; i < values.size(); ++i) acc += 0.5 * (values[i - 1] + values[i]) * dt;
    return acc;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(base) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

namespace {

std::vector<double> session_weights(const VideoUserParams& p) {
    std::vector<double> w;
    w.reserve(p.session_lengths.size());
    for (const auto& s : p.session_lengths) w.push_back(s.probability);
    return w;
}

}  // namespace

VideoUserSource::VideoUserSource(const VideoUserParams& params, std::uint64_t seed)
    : params_((params.validate(), params)),
      rng_(seed),
      interuse_(1.0 / params.interuse_mean_s),
      interburst_(1.0 / params.interburst_mean_s),
      interpacket_(1.0 / params.interpacket_mean_s),
      burst_(params.burst_size_mean, params.burst_size_std()) {
    const auto w = session_weights(params_);
    session_pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

double VideoUserSource::interuse_gap() { return interuse_(rng_); }
double VideoUserSource::interburst_gap() { return interburst_(rng_); }
double VideoUserSource::interpacket_gap() { return interpacket_(rng_); }

double VideoUserSource::session_length() {
    return params_.session_lengths[session_pick_(rng_)].duration_s;
}

std::uint64_t VideoUserSource::burst_size() {
    const double n = std::round(burst_(rng_));
    return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

void VideoUserSource::run(const Horizon& horizon, const std::function<void(double)>& emit) {
    double t = horizon.t0;
    while (true) {
        t += interuse_gap();
        if (t > horizon.t1) return;
        const double session_end = t + session_length();
        double burst_start = t;
        while (burst_start < session_end && burst_start <= horizon.t1) {
            const std::uint64_t n = burst_size();
            double tp = burst_start;
            for (std::uint64_t k = 0; k < n; ++k) {
                if (k > 0) tp += interpacket_gap();
                if (tp >= session_end || tp > horizon.t1) break;
                emit(tp);
            }
            burst_start = tp + interburst_gap();
        }
        t = session_end;
    }
}

PacketTrace generate_video_user(const VideoUserParams& params, const Horizon& horizon,
                                std::uint64_t seed) {
    if (!(horizon.t1 > horizon.t0)) throw ParameterError("horizon must be nonempty");
    VideoUserSource source(params, seed);
    PacketTrace trace{horizon, {}};
    const double size = static_cast<double>(params.packet_size_bits);
    source.run(horizon, [&](double t) { trace.events.push_back({t, size}); });
    return trace;
}

PacketTrace merge_traces(std::span<const PacketTrace> traces) {
    if (traces.empty()) return {};
    const Horizon h = traces.front().horizon;
    std::size_t total = 0;
    for (const auto& tr : traces) {
        if (!(tr.horizon == h)) throw InputError("merge_traces: mismatched horizons");
        total += tr.events.size();
    }
    PacketTrace out{h, {}};
    out.events.reserve(total);

    // k-way merge; ties keep input order so the result is deterministic.
    using Head = std::pair<double, std::size_t>;
    std::priority_queue<Head, std::vector<Head>, std::greater<>> heads;
    std::vector<std::size_t> pos(traces.size(), 0);
    for (std::size_t k = 0; k < traces.size(); ++k)
        if (!traces[k].events.empty()) heads.emplace(traces[k].events.front().t, k);
    while (!heads.empty()) {
        const auto [t, k] = heads.top();
        heads.pop();
        out.events.push_back(traces[k].events[pos[k]++]);
        if (pos[k] < traces[k].events.size()) heads.emplace(traces[k].events[pos[k]].t, k);
    }
    return out;
}

std::size_t bin_count(const Horizon& horizon, double dt) {
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    const double n = std::ceil(horizon.length() / dt - 1e-9);
    return n <= 0.0 ? 0 : static_cast<std::size_t>(n);
}

RateBinner::RateBinner(const Horizon& horizon, double dt)
    : t0_(horizon.t0), dt_(dt), bits_(bin_count(horizon, dt), 0.0) {}

void RateBinner::add(double t, double bits) {
    if (bits_.empty()) return;
    const double pos = std::ceil((t - t0_) / dt_) - 1.0;
    std::size_t i = 0;
    if (pos > 0.0) i = std::min(static_cast<std::size_t>(pos), bits_.size() - 1);
    bits_[i] += bits;
}

RateSeries RateBinner::finish() const {
    RateSeries s{t0_, dt_, bits_};
    for (auto& v : s.values) v /= dt_;
    return s;
}

RateSeries trace_to_inflow(const PacketTrace& trace, double dt) {
    RateBinner binner(trace.horizon, dt);
    for (const auto& e : trace.events) binner.add(e.t, e.size_bits);
    return binner.finish();
}

RateSeries generate_aggregate_inflow(const VideoUserParams& params, const Horizon& horizon,
                                     std::size_t users, std::uint64_t seed, double dt,
                                     unsigned workers) {
    params.validate();
    workers = std::max(1u, workers);
    const double size = static_cast<double>(params.packet_size_bits);
    // One binner per user, summed in user order: the result does not depend
    // on the worker count.
    std::vector<RateSeries> per_user(users);

    auto work = [&](unsigned w) {
        for (std::size_t u = w; u < users; u += workers) {
            RateBinner binner(horizon, dt);
            VideoUserSource source(params, derive_seed(seed, u));
            source.run(horizon, [&](double t) { binner.add(t, size); });
            per_user[u] = binner.finish();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    RateSeries total = RateBinner(horizon, dt).finish();
    for (const auto& s : per_user) total = add_series(total, s);
    return total;
}

RateSeries scale_series(const RateSeries& x, double factor) {
    RateSeries out = x;
    for (auto& v : out.values) v *= factor;
    return out;
}

RateSeries add_series(const RateSeries& a, const RateSeries& b) {
    if (a.t0 != b.t0 || a.dt != b.dt || a.size() != b.size())
        throw InputError("add_series: grid mismatch");
    RateSeries out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += b.values[i];
    return out;
}

double mean_rate(const RateSeries& x) {
    if (x.empty()) throw ParameterError("mean_rate: empty series");
    return std::accumulate(x.values.begin(), x.values.end(), 0.0) /
           static_cast<double>(x.size());
}

double intensity(const RateSeries& x, double mu) {
    if (!(mu > 0.0)) throw ParameterError("intensity: mu must be positive");
    return mean_rate(x) / mu;
}

}  // namespace fluidq
