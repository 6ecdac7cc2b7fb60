#include "fluidq/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fluidq/error.hpp"

namespace fluidq {

void Topology::validate() const {
    const std::size_t n = origins(), m = destinations();
    if (n == 0 || m == 0) throw ParameterError("topology needs at least one origin and destination");
    for (double r : access_rates)
        if (!(r > 0.0)) throw ParameterError("access rates must be positive");
    for (double r : egress_rates)
        if (!(r > 0.0)) throw ParameterError("egress rates must be positive");
    if (!(core_rate > 0.0)) throw ParameterError("core rate must be positive");
    if (!(core_capacity > 0.0)) throw ParameterError("core capacity must be positive");
    if (!(packet_size_bits >= 0.0)) throw ParameterError("packet size must be >= 0");
    if (routing.size() != n) throw ParameterError("routing matrix must have one row per origin");
    for (std::size_t i = 0; i < n; ++i) {
        if (routing[i].size() != m)
            throw ParameterError("routing row " + std::to_string(i) + " has wrong length");
        double sum = 0.0;
        for (double p : routing[i]) {
            if (!(p >= 0.0)) throw ParameterError("routing entries must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ParameterError("routing row " + std::to_string(i) + " sums to " +
                                 std::to_string(sum));
    }
    if (!access_alpha.empty() && access_alpha.size() != n)
        throw ParameterError("access_alpha must have one entry per origin");
    if (!egress_alpha.empty() && egress_alpha.size() != m)
        throw ParameterError("egress_alpha must have one entry per destination");
    if (!priority_egress_share.empty()) {
        if (priority_egress_share.size() != m)
            throw ParameterError("priority_egress_share must have one entry per destination");
        double sum = 0.0;
        for (double w : priority_egress_share) {
            if (!(w >= 0.0)) throw ParameterError("priority_egress_share entries must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ParameterError("priority_egress_share must sum to 1");
    }
}

namespace {

// alpha from the link inflow unless pinned. An all-zero inflow never builds a
// queue, so any positive alpha gives the same trajectory; 1/mu is used.
double link_alpha(const std::optional<double>& pinned, const RateSeries& inflow, double mu) {
    if (pinned) return *pinned;
    if (mean_rate(inflow) > 0.0) return compute_alpha(inflow, mu);
    return 1.0 / mu;
}

template <class T>
std::optional<double> pick(const std::vector<std::optional<T>>& v, std::size_t i) {
    return v.empty() ? std::nullopt : v[i];
}

void check_inflows(const Topology& topo, std::span<const RateSeries> inflows) {
    if (inflows.size() != topo.origins())
        throw InputError("propagate: need one inflow per origin");
    for (const auto& x : inflows) {
        if (x.empty()) throw InputError("propagate: empty inflow");
        if (x.t0 != inflows[0].t0 || x.dt != inflows[0].dt || x.size() != inflows[0].size())
            throw InputError("propagate: inflows must share a grid");
    }
}

SolverOptions on_inflow_grid(SolverOptions opts, const RateSeries& x) {
    // Downstream links consume outflows sampled on the inflow grid.
    opts.output_dt = x.dt;
    return opts;
}

void run_access(const Topology& topo, std::span<const RateSeries> inflows,
                const SolverOptions& opts, DtState& st) {
    for (std::size_t i = 0; i < topo.origins(); ++i) {
        QueueSpec spec;
        spec.mu = topo.access_rates[i];
        spec.alpha = link_alpha(pick(topo.access_alpha, i), inflows[i], topo.access_rates[i]);
        st.access.push_back(integrate_queue(inflows[i], spec, opts));
        st.access_out.push_back(st.access.back().outflow_series());
    }
    st.core_in = st.access_out.front();
    for (std::size_t i = 1; i < st.access_out.size(); ++i)
        st.core_in = add_series(st.core_in, st.access_out[i]);
}

// Z_j = sum_i p_ij (Y_i / Y) Z, plus the routed priority outflow if any.
void run_egress(const Topology& topo, const SolverOptions& opts, DtState& st) {
    const auto shares = split_outflow(st.access_out, st.core_out);
    const std::size_t m = topo.destinations();
    for (std::size_t j = 0; j < m; ++j) {
        RateSeries zj{st.core_out.t0, st.core_out.dt,
                      std::vector<double>(st.core_out.size(), 0.0)};
        for (std::size_t i = 0; i < topo.origins(); ++i)
            for (std::size_t b = 0; b < zj.size(); ++b)
                zj.values[b] += topo.routing[i][j] * shares[i].values[b];
        if (st.priority_out && !topo.priority_egress_share.empty())
            for (std::size_t b = 0; b < zj.size(); ++b)
                zj.values[b] += topo.priority_egress_share[j] * st.priority_out->values[b];
        st.egress_in.push_back(std::move(zj));
    }
    for (std::size_t j = 0; j < m; ++j) {
        QueueSpec spec;
        spec.mu = topo.egress_rates[j];
        spec.alpha = link_alpha(pick(topo.egress_alpha, j), st.egress_in[j], topo.egress_rates[j]);
        st.egress.push_back(integrate_queue(st.egress_in[j], spec, opts));
        st.egress_out.push_back(st.egress.back().outflow_series());
    }
}

}  // namespace

DtState propagate(const Topology& topo, std::span<const RateSeries> inflows,
                  const SolverOptions& opts_in) {
    topo.validate();
    check_inflows(topo, inflows);
    const SolverOptions opts = on_inflow_grid(opts_in, inflows[0]);
    DtState st;
    run_access(topo, inflows, opts, st);

    QueueSpec core;
    core.mu = topo.core_rate;
    core.alpha = link_alpha(topo.core_alpha, st.core_in, topo.core_rate);
    core.capacity = topo.core_capacity;
    core.finite_params = topo.core_gate;
    st.core = integrate_finite_queue(st.core_in, core, opts);
    st.core_out = st.core.outflow_series();

    run_egress(topo, opts, st);
    return st;
}

DtState inject_priority_flow(const Topology& topo, std::span<const RateSeries> inflows,
                             const RateSeries& priority_inflow, const SolverOptions& opts_in) {
    topo.validate();
    check_inflows(topo, inflows);
    if (priority_inflow.t0 != inflows[0].t0 || priority_inflow.dt != inflows[0].dt ||
        priority_inflow.size() != inflows[0].size())
        throw InputError("inject_priority_flow: priority inflow must share the inflow grid");
    const SolverOptions opts = on_inflow_grid(opts_in, inflows[0]);
    DtState st;
    run_access(topo, inflows, opts, st);

    // One alpha for both queues, from the aggregate core inflow.
    const RateSeries total = add_series(priority_inflow, st.core_in);
    const double alpha = link_alpha(topo.core_alpha, total, topo.core_rate);
    auto pair = integrate_priority_pair(priority_inflow, st.core_in, topo.core_rate, alpha, 0.0,
                                        0.0, opts);
    st.priority_in = priority_inflow;
    st.priority_out = pair.high.outflow_series();
    st.priority_core = std::move(pair.high);
    st.core = std::move(pair.low);
    st.core_out = st.core.outflow_series();

    run_egress(topo, opts, st);
    return st;
}

namespace {

std::optional<double> try_q(const QueueTrajectory& tr, double t) {
    const double pos = (t - tr.t0) / tr.dt;
    if (pos < -1e-9 || pos > static_cast<double>(tr.size() - 1) + 1e-9) return std::nullopt;
    return tr.q_at(std::clamp(t, tr.t0, tr.end_time()));
}

std::optional<double> try_latency(double t, std::size_t i, std::size_t j, const DtState& st,
                                  const Topology& topo) {
    const double s = topo.packet_size_bits;
    const double mu_i = topo.access_rates[i];
    const auto qa = try_q(st.access[i], t);
    if (!qa) return std::nullopt;
    const double hop1 = (*qa + s) / mu_i;
    const double t_o = t + hop1;
    const auto qc = try_q(st.core, t_o);
    if (!qc) return std::nullopt;
    const double hop2 = (*qc + s) / topo.core_rate;
    const double transit = topo.transit_divisor == TransitDivisor::Core ? hop2 : (*qc + s) / mu_i;
    const double t_d = t_o + transit;
    const auto qe = try_q(st.egress[j], t_d);
    if (!qe) return std::nullopt;
    return hop1 + hop2 + (*qe + s) / topo.egress_rates[j];
}

std::optional<double> try_expected(double t, const DtState& st, const Topology& topo) {
    double acc = 0.0;
    for (std::size_t i = 0; i < topo.origins(); ++i)
        for (std::size_t j = 0; j < topo.destinations(); ++j) {
            const auto l = try_latency(t, i, j, st, topo);
            if (!l) return std::nullopt;
            acc += *l;
        }
    return acc / static_cast<double>(topo.origins() * topo.destinations());
}

}  // namespace

double latency(double t, std::size_t i, std::size_t j, const DtState& state,
               const Topology& topo) {
    if (i >= topo.origins() || j >= topo.destinations())
        throw ParameterError("latency: origin or destination index out of range");
    const auto l = try_latency(t, i, j, state, topo);
    if (!l) throw HorizonError("latency: lookup beyond the simulated horizon");
    return *l;
}

double expected_latency(double t, const DtState& state, const Topology& topo) {
    const auto l = try_expected(t, state, topo);
    if (!l) throw HorizonError("expected_latency: lookup beyond the simulated horizon");
    return *l;
}

LatencySeries expected_latency_series(const DtState& state, const Topology& topo) {
    LatencySeries out;
    const auto& grid = state.access.front();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.time_at(k);
        if (const auto l = try_expected(t, state, topo)) {
            out.t.push_back(t);
            out.l_od.push_back(*l);
        }
    }
    return out;
}

double max_expected_latency(const DtState& state, const Topology& topo) {
    const auto series = expected_latency_series(state, topo);
    if (series.l_od.empty()) throw HorizonError("max_expected_latency: empty evaluable window");
    return *std::max_element(series.l_od.begin(), series.l_od.end());
}

}  // namespace fluidq
