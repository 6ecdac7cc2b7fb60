#include "fluidq/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fluidq/error.hpp"

namespace fluidq::csv {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot read " + path.string());
    return is;
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line) {
    double v = 0.0;
    while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError(path.string() + ":" + std::to_string(line) + ": bad number '" +
                         std::string(s) + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void expect_header(std::istream& is, const std::string& header, const std::filesystem::path& p) {
    std::string line;
    if (!std::getline(is, line)) throw InputError(p.string() + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw InputError(p.string() + ": expected header '" + header + "', got '" + line + "'");
}

// Reads all remaining rows with exactly `cols` numeric fields.
std::vector<std::vector<double>> read_rows(std::istream& is, std::size_t cols,
                                           const std::filesystem::path& p) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line);
        if (fields.size() != cols)
            throw InputError(p.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(cols) + " fields");
        std::vector<double> row;
        row.reserve(cols);
        for (const auto& f : fields) row.push_back(parse_double(f, p, lineno));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_trace(const std::filesystem::path& path, const PacketTrace& trace) {
    auto os = open_out(path);
    os << "t_arrival_s,size_bits\n";
    char buf[96];
    for (const auto& e : trace.events) {
        std::snprintf(buf, sizeof buf, "%.9f,", e.t);
        os << buf << format_double(e.size_bits) << '\n';
    }
}

PacketTrace read_trace(const std::filesystem::path& path, const Horizon& horizon) {
    auto is = open_in(path);
    expect_header(is, "t_arrival_s,size_bits", path);
    PacketTrace tr{horizon, {}};
    for (const auto& r : read_rows(is, 2, path)) tr.events.push_back({r[0], r[1]});
    tr.validate();
    return tr;
}

void write_rate_series(const std::filesystem::path& path, const RateSeries& x) {
    auto os = open_out(path);
    os << "t_s,rate_bps\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        os << format_double(x.time_at(i)) << ',' << format_double(x.values[i]) << '\n';
}

RateSeries read_rate_series(const std::filesystem::path& path) {
    auto is = open_in(path);
    expect_header(is, "t_s,rate_bps", path);
    const auto rows = read_rows(is, 2, path);
    if (rows.size() < 2) throw InputError(path.string() + ": need at least two rows");
    RateSeries x;
    x.dt = rows[1][0] - rows[0][0];
    x.t0 = rows[0][0] - x.dt;
    for (const auto& r : rows) x.values.push_back(r[1]);
    return x;
}

void write_trajectory(const std::filesystem::path& path, const QueueTrajectory& traj) {
    {
        auto os = open_out(path);
        os << "t_s,q_bits,y_bps\n";
        for (std::size_t i = 0; i < traj.size(); ++i)
            os << format_double(traj.time_at(i)) << ',' << format_double(traj.q[i]) << ','
               << format_double(traj.y[i]) << '\n';
    }
    write_key_values(path.string() + ".stats",
                     {{"steps", std::to_string(traj.stats.steps)},
                      {"rejected_steps", std::to_string(traj.stats.rejected)},
                      {"rhs_evals", std::to_string(traj.stats.rhs_evals)},
                      {"max_negative_q_bits", format_double(traj.stats.max_negative_q)},
                      {"lost_bits", format_double(traj.lost_bits())}});
}

QueueTrajectory read_trajectory(const std::filesystem::path& path) {
    auto is = open_in(path);
    expect_header(is, "t_s,q_bits,y_bps", path);
    const auto rows = read_rows(is, 3, path);
    if (rows.size() < 2) throw InputError(path.string() + ": need at least two rows");
    QueueTrajectory tr;
    tr.t0 = rows[0][0];
    tr.dt = rows[1][0] - rows[0][0];
    for (const auto& r : rows) {
        tr.q.push_back(r[1]);
        tr.y.push_back(r[2]);
    }
    return tr;
}

void write_queue_samples(const std::filesystem::path& path, const DesResult& result) {
    auto os = open_out(path);
    os << "t_s,q_bits\n";
    for (std::size_t i = 0; i < result.q_sampled.size(); ++i)
        os << format_double(result.sample_time(i)) << ',' << format_double(result.q_sampled[i])
           << '\n';
}

void write_latency(const std::filesystem::path& path, const LatencySeries& series) {
    auto os = open_out(path);
    os << "t_s,L_od_s\n";
    for (std::size_t i = 0; i < series.t.size(); ++i)
        os << format_double(series.t[i]) << ',' << format_double(series.l_od[i]) << '\n';
}

void write_table(const std::filesystem::path& path, const Table& table) {
    auto os = open_out(path);
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        os << (c ? "," : "") << table.columns[c];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << '\n';
    }
}

Table read_table(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string header;
    if (!std::getline(is, header)) throw InputError(path.string() + ": missing header");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    Table t;
    t.columns = split(header);
    t.rows = read_rows(is, t.columns.size(), path);
    return t;
}

void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
    auto os = open_out(path);
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

}  // namespace fluidq::csv
