#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

namespace fluidq {

// ||q_disc - q_log||_2 / (sqrt(n) max q_disc).
double error_relative_to_max(std::span<const double> q_disc, std::span<const double> q_log);

// |max q_disc - max q_log| / max q_disc.
double max_occupancy_error(std::span<const double> q_disc, std::span<const double> q_log);

struct MeanRelativeError {
    double value = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;  // bins with y_disc == 0
};

// Mean of |y_disc - y_log| / |y_disc| over bins where y_disc != 0.
MeanRelativeError mean_relative_outflow_error(std::span<const double> y_disc,
                                              std::span<const double> y_log);

// ||y_disc - y_log||_2 / ||y_disc||_2.
double global_relative_error(std::span<const double> y_disc, std::span<const double> y_log);

struct AggregationBound {
    double bits;     // mu (1 - rho) dt
    double seconds;  // (1 - rho) dt
};

// Best-case queue mismatch caused by aggregating the inflow every dt seconds.
AggregationBound aggregation_error_bound(double mu, double rho, double dt);

// max_t |q_disc - q_log| / mu.
double observed_delay_gap(std::span<const double> q_disc, std::span<const double> q_log,
                          double mu);

struct ErrorReport {
    double rho = 0.0;
    double err_rel_max = 0.0;
    double max_occupancy_err = 0.0;
    double mean_rel_outflow_err = 0.0;
    std::size_t mean_rel_excluded_bins = 0;
    double global_rel_err = 0.0;
    double aggregation_bound_s = 0.0;
    double observed_delay_gap_s = 0.0;
    double baseline_mean_rel_err = 0.0;
    double baseline_global_rel_err = 0.0;
    double max_q_disc = 0.0;
    double max_q_log = 0.0;
    double runtime_fluid_s = 0.0;
    double runtime_des_s = 0.0;

    void write_key_values(std::ostream& os) const;
    static std::string csv_header();
    std::string csv_row() const;
};

}  // namespace fluidq
