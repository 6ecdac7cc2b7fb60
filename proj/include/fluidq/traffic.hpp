#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace fluidq {

// Half-open-free simulation window [t0, t1] in seconds.
struct Horizon {
    double t0 = 0.0;
    double t1 = 0.0;

    double length() const { return t1 - t0; }
    bool operator==(const Horizon&) const = default;
};

struct SessionLength {
    double duration_s;
    double probability;
};

// How the burst-size dispersion figure is read.
enum class DispersionKind { StdDev, Variance };

// Bursty on/off source describing one video user. Defaults are the fitted
// values for an HD streaming client (packet 1464 B, 45 min mean interuse).
struct VideoUserParams {
    std::uint64_t packet_size_bits = 11712;
    double burst_size_mean = 1714.0;       // packets per burst
    double burst_size_dispersion = 278.0;  // packets, see dispersion_kind
    DispersionKind dispersion_kind = DispersionKind::StdDev;
    double interburst_mean_s = 5.56;
    double interpacket_mean_s = 0.00345;
    double interuse_mean_s = 2700.0;
    std::vector<SessionLength> session_lengths = {
        {5 * 60.0, 0.40}, {15 * 60.0, 0.30}, {30 * 60.0, 0.25}, {120 * 60.0, 0.05}};

    double burst_size_std() const;
    double mean_session_s() const;

    // Throws ParameterError.
    void validate() const;
};

// Long-run mean bit rate of one user, ignoring truncation at session ends.
double expected_user_rate(const VideoUserParams& params);

struct PacketEvent {
    double t;          // arrival, seconds
    double size_bits;  // > 0

    bool operator==(const PacketEvent&) const = default;
};

// Packets sorted by arrival time, all inside the horizon.
struct PacketTrace {
    Horizon horizon;
    std::vector<PacketEvent> events;

    double total_bits() const;
    bool empty() const { return events.empty(); }

    // Throws InputError when unsorted, out of horizon or with nonpositive sizes.
    void validate() const;
};

// Uniformly sampled rate in bits/s. values[i] is the mean rate over the bin
// (t0 + i*dt, t0 + (i+1)*dt] and is attached to the right edge of that bin.
struct RateSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double time_at(std::size_t i) const { return t0 + static_cast<double>(i + 1) * dt; }
    double end_time() const { return t0 + static_cast<double>(values.size()) * dt; }

    // Integral of the piecewise linear interpolant over [t0, end_time()],
    // with constant extrapolation on the first bin.
    double integral() const;
};

// Splits a base seed into independent per-stream seeds (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Sampling primitives and the session/burst/packet state machine of one user.
class VideoUserSource {
public:
    VideoUserSource(const VideoUserParams& params, std::uint64_t seed);

    double interuse_gap();
    double session_length();
    std::uint64_t burst_size();
    double interburst_gap();
    double interpacket_gap();

    // Emits packet arrival times in increasing order. The source starts idle
    // with an interuse gap; bursts are cut at the end of their session.
    void run(const Horizon& horizon, const std::function<void(double)>& emit);

    const VideoUserParams& params() const { return params_; }

private:
    VideoUserParams params_;
    std::mt19937_64 rng_;
    std::exponential_distribution<double> interuse_;
    std::exponential_distribution<double> interburst_;
    std::exponential_distribution<double> interpacket_;
    std::normal_distribution<double> burst_;
    std::discrete_distribution<std::size_t> session_pick_;
};

PacketTrace generate_video_user(const VideoUserParams& params, const Horizon& horizon,
                                std::uint64_t seed);

// Sorted merge. All traces must share the same horizon.
PacketTrace merge_traces(std::span<const PacketTrace> traces);

// Number of dt bins covering a horizon (last bin may stick out).
std::size_t bin_count(const Horizon& horizon, double dt);

// Streaming aggregation into (lo, hi] bins; arrivals at t0 land in bin 0.
class RateBinner {
public:
    RateBinner(const Horizon& horizon, double dt);

    void add(double t, double bits);
    RateSeries finish() const;

private:
    double t0_;
    double dt_;
    std::vector<double> bits_;
};

RateSeries trace_to_inflow(const PacketTrace& trace, double dt);

// Aggregate inflow of `users` independent video users, binned on the fly
// without materialising packets. User u is seeded with derive_seed(seed, u).
RateSeries generate_aggregate_inflow(const VideoUserParams& params, const Horizon& horizon,
                                     std::size_t users, std::uint64_t seed, double dt,
                                     unsigned workers = 1);

RateSeries scale_series(const RateSeries& x, double factor);

// Pointwise sum; series must share t0, dt and length.
RateSeries add_series(const RateSeries& a, const RateSeries& b);

double mean_rate(const RateSeries& x);
double intensity(const RateSeries& x, double mu);

}  // namespace fluidq
