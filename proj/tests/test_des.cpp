#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fluidq/des.hpp"
#include "fluidq/error.hpp"
#include "oracles.hpp"

using namespace fluidq;

namespace {

PacketTrace random_trace(std::mt19937_64& rng, std::size_t n, double t1, double max_size) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PacketTrace tr{{0.0, t1}, {}};
    for (std::size_t k = 0; k < n; ++k) tr.events.push_back({u(rng) * t1, 1.0 + max_size * u(rng)});
    // A few simultaneous arrivals
    for (std::size_t k = 0; k + 1 < n; k += 7) tr.events[k + 1].t = tr.events[k].t;
    std::sort(tr.events.begin(), tr.events.end(),
              [](const auto& a, const auto& b) { return a.t < b.t; });
    return tr;
}

}  // namespace

TEST_CASE("single packet and simultaneous pair") {
    DesConfig cfg{4.0, std::nullopt, 1.0};
    const auto one = simulate_fifo(PacketTrace{{0, 10}, {{2.0, 8.0}}}, cfg);
    REQUIRE(one.departures.events.size() == 1);
    CHECK(one.departures.events[0].t == 4.0);

    const auto two = simulate_fifo(PacketTrace{{0, 10}, {{2.0, 8.0}, {2.0, 8.0}}}, cfg);
    REQUIRE(two.departures.events.size() == 2);
    CHECK(two.departures.events[1].t == 6.0);
    CHECK(two.q_sampled[2] == 16.0);  // both packets, arrival before sample at t = 2
    CHECK(two.q_sampled[3] == 12.0);
    CHECK(two.q_sampled[5] == 4.0);
    CHECK(two.q_sampled[6] == 0.0);
    CHECK(two.q_sampled.size() == 11);
}

TEST_CASE("invalid input") {
    CHECK_THROWS_AS(simulate_fifo(PacketTrace{{0, 10}, {{3.0, 1.0}, {2.0, 1.0}}}, DesConfig{}),
                    InputError);
    CHECK_THROWS_AS(simulate_fifo(PacketTrace{{0, 10}, {}}, DesConfig{0.0, std::nullopt, 1.0}),
                    ParameterError);
    CHECK_THROWS_AS(simulate_fifo(PacketTrace{{0, 10}, {}}, DesConfig{1.0, std::nullopt, 0.0}),
                    ParameterError);
}

TEST_CASE("Lindley recursion, FIFO and replayed backlog agree (property)") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        CAPTURE(trial);
        const double mu = 1.0 + 10 * u(rng);
        const auto tr = random_trace(rng, 5 + static_cast<std::size_t>(200 * u(rng)), 100.0,
                                     mu * (0.5 + 2 * u(rng)));
        const DesConfig cfg{mu, std::nullopt, 0.5 + 3 * u(rng)};
        const auto res = simulate_fifo(tr, cfg);

        REQUIRE(res.departures.events.size() == tr.events.size());
        for (std::size_t j = 0; j < res.departure_source.size(); ++j)
            CHECK(res.departure_source[j] == j);

        const auto w = oracle::lindley_waits(tr.events, mu);
        for (std::size_t j = 0; j < tr.events.size(); ++j) {
            const double expect = tr.events[j].t + w[j] + tr.events[j].size_bits / mu;
            CHECK(res.departures.events[j].t == doctest::Approx(expect).epsilon(1e-12).scale(100));
        }
        for (std::size_t i = 0; i < res.q_sampled.size(); ++i) {
            const double ref = oracle::replay_backlog(tr.events, mu, res.sample_time(i));
            CHECK(res.q_sampled[i] == doctest::Approx(ref).epsilon(1e-9).scale(mu));
            CHECK(res.q_sampled[i] >= -1e-9 * mu);
        }

        double in = 0.0, out = 0.0;
        for (const auto& e : tr.events) in += e.size_bits;
        for (const auto& e : res.departures.events) out += e.size_bits;
        CHECK(out == doctest::Approx(in));
        CHECK(res.dropped_packets == 0);
    }
}

TEST_CASE("work conservation: the server is busy whenever backlog is positive") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const double mu = 3.0;
        const auto tr = random_trace(rng, 80, 50.0, 6.0);
        const auto res = simulate_fifo(tr, DesConfig{mu, std::nullopt, 1.0});
        // Each service starts at max(arrival, previous completion): no idle gap
        // while a packet is waiting.
        double prev = -1e300;
        for (std::size_t j = 0; j < tr.events.size(); ++j) {
            const double start = res.departures.events[j].t - tr.events[j].size_bits / mu;
            CHECK(start == doctest::Approx(std::max(tr.events[j].t, prev)).epsilon(1e-12).scale(50));
            prev = res.departures.events[j].t;
        }
    }
}

TEST_CASE("drop-tail buffer") {
    // Capacity 10 bits, packets of 4 bits: the third simultaneous packet is dropped.
    DesConfig cfg{1.0, 10.0, 1.0};
    const PacketTrace tr{{0, 30}, {{1.0, 4}, {1.0, 4}, {1.0, 4}, {20.0, 4}}};
    const auto res = simulate_fifo(tr, cfg);
    CHECK(res.dropped_packets == 1);
    CHECK(res.dropped_bits == 4.0);
    REQUIRE(res.departures.events.size() == 3);
    CHECK(res.departure_source == std::vector<std::size_t>{0, 1, 3});
    for (double q : res.q_sampled) CHECK(q <= 10.0);
}

TEST_CASE("departures_to_outflow") {
    SUBCASE("no departures") {
        const auto res = simulate_fifo(PacketTrace{{0, 100}, {}}, DesConfig{1.0, std::nullopt, 1.0});
        const auto y = departures_to_outflow(res, 10.0);
        CHECK(y.size() == 10);
        for (double v : y.values) CHECK(v == 0.0);
    }
    SUBCASE("saturated server emits mu per bin") {
        PacketTrace tr{{0, 130}, {}};
        for (int k = 0; k < 500; ++k) tr.events.push_back({0.0, 1.0});  // drains at t = 125
        const auto res = simulate_fifo(tr, DesConfig{4.0, std::nullopt, 1.0});
        const auto y = departures_to_outflow(res, 10.0);
        for (std::size_t i = 0; i < 12; ++i) CHECK(y.values[i] == doctest::Approx(4.0));
    }
    SUBCASE("binning conserves departed bits and clips at the horizon") {
        std::mt19937_64 rng(4);
        const auto tr = random_trace(rng, 300, 100.0, 3.0);
        const auto res = simulate_fifo(tr, DesConfig{2.0, std::nullopt, 1.0});
        const auto full = departures_to_outflow(res, 7.0);
        double sum = 0.0, bits = 0.0, inside = 0.0;
        for (double v : full.values) sum += v * 7.0;
        for (const auto& e : res.departures.events) {
            bits += e.size_bits;
            if (e.t <= 100.0) inside += e.size_bits;
        }
        CHECK(sum == doctest::Approx(bits).epsilon(1e-12));
        const auto clipped = departures_to_outflow(res, 10.0, Horizon{0, 100});
        CHECK(clipped.size() == 10);
        double csum = 0.0;
        for (double v : clipped.values) csum += v * 10.0;
        CHECK(csum == doctest::Approx(inside).epsilon(1e-12));
    }
}
