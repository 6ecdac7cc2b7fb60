#include "fluidq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fluidq/error.hpp"

namespace fluidq {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
    if (a.size() != b.size() || a.empty())
        throw InputError(std::string(op) + ": vectors must be nonempty and of equal length");
}

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

double diff_norm(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace

double error_relative_to_max(std::span<const double> q_disc, std::span<const double> q_log) {
    require_same_length(q_disc, q_log, "error_relative_to_max");
    const double m = max_of(q_disc);
    if (!(m > 0.0)) throw DomainError("error_relative_to_max: max(q_disc) is zero");
    return diff_norm(q_disc, q_log) / (std::sqrt(static_cast<double>(q_disc.size())) * m);
}

double max_occupancy_error(std::span<const double> q_disc, std::span<const double> q_log) {
    require_same_length(q_disc, q_log, "max_occupancy_error");
    const double m = max_of(q_disc);
    if (!(m > 0.0)) throw DomainError("max_occupancy_error: max(q_disc) is zero");
    return std::abs(m - max_of(q_log)) / m;
}

MeanRelativeError mean_relative_outflow_error(std::span<const double> y_disc,
                                              std::span<const double> y_log) {
    require_same_length(y_disc, y_log, "mean_relative_outflow_error");
    MeanRelativeError r;
    double acc = 0.0;
    for (std::size_t i = 0; i < y_disc.size(); ++i) {
        if (y_disc[i] == 0.0) {
            ++r.excluded;
            continue;
        }
        acc += std::abs(y_disc[i] - y_log[i]) / std::abs(y_disc[i]);
        ++r.included;
    }
    if (r.included == 0) throw DomainError("mean_relative_outflow_error: all bins are zero");
    r.value = acc / static_cast<double>(r.included);
    return r;
}

double global_relative_error(std::span<const double> y_disc, std::span<const double> y_log) {
    require_same_length(y_disc, y_log, "global_relative_error");
    double norm = 0.0;
    for (double v : y_disc) norm += v * v;
    if (!(norm > 0.0)) throw DomainError("global_relative_error: ||y_disc|| is zero");
    return diff_norm(y_disc, y_log) / std::sqrt(norm);
}

AggregationBound aggregation_error_bound(double mu, double rho, double dt) {
    if (rho < 0.0 || rho > 1.0) throw DomainError("aggregation_error_bound: rho must be in [0,1]");
    return {mu * (1.0 - rho) * dt, (1.0 - rho) * dt};
}

double observed_delay_gap(std::span<const double> q_disc, std::span<const double> q_log,
                          double mu) {
    require_same_length(q_disc, q_log, "observed_delay_gap");
    if (!(mu > 0.0)) throw DomainError("observed_delay_gap: mu must be positive");
    double worst = 0.0;
    for (std::size_t i = 0; i < q_disc.size(); ++i)
        worst = std::max(worst, std::abs(q_disc[i] - q_log[i]));
    return worst / mu;
}

void ErrorReport::write_key_values(std::ostream& os) const {
    char buf[128];
    auto kv = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s=%.10g\n", key, v);
        os << buf;
    };
    kv("rho", rho);
    kv("err_rel_max", err_rel_max);
    kv("max_occupancy_err", max_occupancy_err);
    kv("mean_rel_outflow_err", mean_rel_outflow_err);
    os << "mean_rel_excluded_bins=" << mean_rel_excluded_bins << '\n';
    kv("global_rel_err", global_rel_err);
    kv("aggregation_bound_s", aggregation_bound_s);
    kv("observed_delay_gap_s", observed_delay_gap_s);
    kv("baseline_mean_rel_err", baseline_mean_rel_err);
    kv("baseline_global_rel_err", baseline_global_rel_err);
    kv("max_q_disc_bits", max_q_disc);
    kv("max_q_log_bits", max_q_log);
    kv("runtime_fluid_s", runtime_fluid_s);
    kv("runtime_des_s", runtime_des_s);
}

std::string ErrorReport::csv_header() {
    return "rho,err_rel_max,max_occupancy_err,mean_rel_outflow_err,global_rel_err,"
           "baseline_mean_rel_err,baseline_global_rel_err,aggregation_bound_s,"
           "observed_delay_gap_s,max_q_disc_bits,max_q_log_bits,runtime_fluid_s,runtime_des_s";
}

std::string ErrorReport::csv_row() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.6g,%.6g",
                  rho, err_rel_max, max_occupancy_err, mean_rel_outflow_err, global_rel_err,
                  baseline_mean_rel_err, baseline_global_rel_err, aggregation_bound_s,
                  observed_delay_gap_s, max_q_disc, max_q_log, runtime_fluid_s, runtime_des_s);
    return buf;
}

}  // namespace fluidq
