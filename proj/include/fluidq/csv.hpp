#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fluidq/des.hpp"
#include "fluidq/fluid.hpp"
#include "fluidq/network.hpp"
#include "fluidq/traffic.hpp"

namespace fluidq::csv {

// `t_arrival_s,size_bits`, times with 9 decimals. The horizon is not stored;
// the reader takes it from the caller.
void write_trace(const std::filesystem::path& path, const PacketTrace& trace);
PacketTrace read_trace(const std::filesystem::path& path, const Horizon& horizon);

// `t_s,rate_bps`, one row per bin, t at the right edge of the bin.
void write_rate_series(const std::filesystem::path& path, const RateSeries& x);
RateSeries read_rate_series(const std::filesystem::path& path);

// `t_s,q_bits,y_bps`, plus a `<path>.stats` key-value sidecar.
void write_trajectory(const std::filesystem::path& path, const QueueTrajectory& traj);
QueueTrajectory read_trajectory(const std::filesystem::path& path);

// `t_s,q_bits`
void write_queue_samples(const std::filesystem::path& path, const DesResult& result);

// `t_s,L_od_s`
void write_latency(const std::filesystem::path& path, const LatencySeries& series);

// Generic numeric table with a header row.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& kv);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace fluidq::csv
