#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fluidq/error.hpp"
#include "fluidq/network.hpp"
#include "oracles.hpp"

using namespace fluidq;

namespace {

Topology small_topology() {
    Topology t;
    t.access_rates = {10.0, 8.0};
    t.core_rate = 15.0;
    t.core_capacity = 500.0;
    t.egress_rates = {9.0, 9.0, 12.0};
    t.routing = {{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}};
    t.packet_size_bits = 1.0;
    return t;
}

QueueTrajectory flat(double q, std::size_t n, double dt = 1.0) {
    QueueTrajectory tr;
    tr.dt = dt;
    tr.q.assign(n, q);
    tr.y.assign(n, 0.0);
    tr.mu.assign(n, 1.0);
    return tr;
}

DtState flat_state(const Topology& t, double qa, double qc, double qe, std::size_t n = 100) {
    DtState st;
    for (std::size_t i = 0; i < t.origins(); ++i) st.access.push_back(flat(qa, n));
    st.core = flat(qc, n);
    for (std::size_t j = 0; j < t.destinations(); ++j) st.egress.push_back(flat(qe, n));
    return st;
}

}  // namespace

TEST_CASE("topology validation") {
    auto t = small_topology();
    CHECK_NOTHROW(t.validate());
    t.routing[0][0] = 0.25;
    CHECK_THROWS_AS(t.validate(), ParameterError);
    t = small_topology();
    t.core_rate = 0.0;
    CHECK_THROWS_AS(t.validate(), ParameterError);
    t = small_topology();
    t.routing.pop_back();
    CHECK_THROWS_AS(t.validate(), ParameterError);
    t = small_topology();
    t.priority_egress_share = {0.5, 0.5};
    CHECK_THROWS_AS(t.validate(), ParameterError);

    // Printed row of the reference routing matrix.
    Topology p;
    p.access_rates = {1.0};
    p.core_rate = 1.0;
    p.core_capacity = 1.0;
    p.egress_rates = {1, 1, 1, 1, 1};
    p.routing = {{0.1293, 0.3124, 0.0548, 0.2534, 0.2501}};
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("zero inflow keeps every queue empty") {
    const auto t = small_topology();
    const std::vector<RateSeries> x(2, RateSeries{0, 1, std::vector<double>(50, 0.0)});
    const auto st = propagate(t, x);
    for (const auto& a : st.access) CHECK(a.max_q() == 0.0);
    CHECK(st.core.max_q() == 0.0);
    for (const auto& e : st.egress) CHECK(e.max_q() == 0.0);
    CHECK(max_expected_latency(st, t) ==
          doctest::Approx((1 / 10.0 + 1 / 8.0) / 2 + 1 / 15.0 + (2 / 9.0 + 1 / 12.0) / 3));
}

TEST_CASE("single path under light load passes the inflow through") {
    Topology t;
    t.access_rates = {100.0};
    t.core_rate = 100.0;
    t.core_capacity = 1e6;
    t.egress_rates = {100.0};
    t.routing = {{1.0}};
    RateSeries x{0, 1, {}};
    for (int i = 0; i < 80; ++i) x.values.push_back(10 + 5 * std::sin(0.2 * i));
    const auto st = propagate(t, std::vector<RateSeries>{x});
    REQUIRE(st.egress_out[0].size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(st.egress_out[0].values[i] == doctest::Approx(x.values[i]).epsilon(1e-6));
    for (double tt : {0.0, 10.0, 40.0})
        CHECK(expected_latency(tt, st, t) == doctest::Approx(latency(tt, 0, 0, st, t)));
}

TEST_CASE("split conservation and mass ordering (property)") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        CAPTURE(trial);
        const auto t = small_topology();
        std::vector<RateSeries> x;
        x.push_back(oracle::random_inflow(rng, 60, 1.0, 9.0));
        x.push_back(oracle::random_inflow(rng, 60, 1.0, 7.0));
        const auto st = propagate(t, x);
        for (std::size_t b = 0; b < st.core_out.size(); ++b) {
            double z = 0.0;
            for (const auto& zj : st.egress_in) z += zj.values[b];
            if (st.core_in.values[b] > 1e-12)
                CHECK(z == doctest::Approx(st.core_out.values[b]).epsilon(1e-12));
        }
        double core_served = st.core.served.back();
        double egress_served = 0.0;
        for (const auto& e : st.egress) egress_served += e.served.back();
        CHECK(egress_served <= core_served * (1 + 1e-6) + 1e-6);

        const auto series = expected_latency_series(st, t);
        REQUIRE_FALSE(series.t.empty());
        for (std::size_t k = 0; k < series.t.size(); ++k)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    CHECK(latency(series.t[k], i, j, st, t) >=
                          1 / t.access_rates[i] + 1 / t.core_rate + 1 / t.egress_rates[j] - 1e-12);
    }
}

TEST_CASE("latency formula on synthetic states") {
    auto t = small_topology();
    t.packet_size_bits = 3.0;
    const auto empty = flat_state(t, 0, 0, 0);
    CHECK(latency(5.0, 1, 2, empty, t) == doctest::Approx(3 / 8.0 + 3 / 15.0 + 3 / 12.0));

    t.packet_size_bits = 0.0;
    CHECK(latency(5.0, 0, 0, empty, t) == 0.0);

    t.packet_size_bits = 3.0;
    const auto loaded = flat_state(t, 5, 30, 6);
    CHECK(latency(5.0, 0, 1, loaded, t) == doctest::Approx(8 / 10.0 + 33 / 15.0 + 9 / 9.0));
    const auto heavier = flat_state(t, 5, 60, 6);
    CHECK(latency(5.0, 0, 1, heavier, t) > latency(5.0, 0, 1, loaded, t));

    // Equal rates everywhere make every L_ij equal, so L_od is that value.
    Topology eq = t;
    eq.access_rates = {10, 10};
    eq.egress_rates = {10, 10, 10};
    const auto st = flat_state(eq, 1, 2, 3);
    CHECK(expected_latency(3.0, st, eq) == doctest::Approx(latency(3.0, 1, 1, st, eq)));

    // Lookups past the trajectory end are rejected and clipped from the series.
    CHECK_THROWS_AS(latency(99.5, 0, 0, loaded, t), HorizonError);
    const auto series = expected_latency_series(loaded, t);
    CHECK(series.t.back() <= 99.0 - (8 / 10.0 + 33 / 15.0));
    CHECK_THROWS_AS(latency(1.0, 5, 0, loaded, t), ParameterError);
}

TEST_CASE("transit divisor switch") {
    auto t = small_topology();
    t.packet_size_bits = 0.0;
    // Egress queue grows in time so t_d matters.
    auto st = flat_state(t, 0, 30, 0);
    for (auto& e : st.egress)
        for (std::size_t i = 0; i < e.size(); ++i) e.q[i] = static_cast<double>(i);
    const double core = latency(0.0, 0, 0, st, t);
    CHECK(core == doctest::Approx(2.0 + 2.0 / 9.0));
    t.transit_divisor = TransitDivisor::Access;
    const double access = latency(0.0, 0, 0, st, t);
    CHECK(access == doctest::Approx(2.0 + 3.0 / 9.0));
}

TEST_CASE("priority injection") {
    auto t = small_topology();
    std::mt19937_64 rng(5);
    std::vector<RateSeries> x;
    x.push_back(oracle::random_inflow(rng, 80, 1.0, 6.0));
    x.push_back(oracle::random_inflow(rng, 80, 1.0, 5.0));
    const auto base = propagate(t, x);
    const double l0 = max_expected_latency(base, t);

    const RateSeries zero{0, 1, std::vector<double>(80, 0.0)};
    const auto same = inject_priority_flow(t, x, zero);
    CHECK(max_expected_latency(same, t) == doctest::Approx(l0).epsilon(1e-5));

    t.priority_egress_share = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    double prev = 0.0;
    for (double p : {0.0, 2.0, 4.0, 6.0, 8.0}) {
        const RateSeries pr{0, 1, std::vector<double>(80, p)};
        const auto st = inject_priority_flow(t, x, pr);
        const double l = max_expected_latency(st, t);
        MESSAGE("priority " << p << " L_max " << l);
        CHECK(l >= prev * (1 - 1e-6));
        prev = l;
        for (std::size_t i = 0; i < st.core.size(); ++i)
            CHECK(st.core.mu[i] + st.priority_core->mu[i] == doctest::Approx(t.core_rate));
    }
    CHECK_THROWS_AS(inject_priority_flow(t, x, RateSeries{0, 2, std::vector<double>(40, 0.0)}),
                    InputError);
}
