#include "fluidq/app/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fluidq::app {

namespace {

using nlohmann::json;

struct UnitValue {
    double value;
    std::string unit;
};

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

UnitValue split_unit(const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc()) throw std::invalid_argument("not a number: '" + text + "'");
    return {v, trim(std::string(res.ptr, s.data() + s.size()))};
}

double lookup(const UnitValue& uv, std::initializer_list<std::pair<const char*, double>> table,
              const std::string& text) {
    for (const auto& [name, factor] : table)
        if (uv.unit == name) return uv.value * factor;
    throw std::invalid_argument("unknown unit in '" + text + "'");
}

}  // namespace

double parse_rate(const std::string& text) {
    return lookup(split_unit(text),
                  {{"", 1.0},
                   {"bps", 1.0},
                   {"b/s", 1.0},
                   {"bit/s", 1.0},
                   {"kb/s", 1e3},
                   {"kbps", 1e3},
                   {"Kb/s", 1e3},
                   {"Mb/s", 1e6},
                   {"Mbps", 1e6},
                   {"Gb/s", 1e9},
                   {"Gbps", 1e9},
                   {"B/s", 8.0},
                   {"kB/s", 8e3},
                   {"MB/s", 8e6},
                   {"GB/s", 8e9}},
                  text);
}

double parse_size(const std::string& text) {
    return lookup(split_unit(text),
                  {{"", 1.0},
                   {"bit", 1.0},
                   {"bits", 1.0},
                   {"b", 1.0},
                   {"kbit", 1e3},
                   {"Kbit", 1e3},
                   {"Mbit", 1e6},
                   {"Gbit", 1e9},
                   {"Mb", 1e6},
                   {"Gb", 1e9},
                   {"B", 8.0},
                   {"kB", 8e3},
                   {"KB", 8e3},
                   {"MB", 8e6},
                   {"GB", 8e9}},
                  text);
}

double parse_duration(const std::string& text) {
    return lookup(split_unit(text),
                  {{"", 1.0},
                   {"ms", 1e-3},
                   {"s", 1.0},
                   {"sec", 1.0},
                   {"min", 60.0},
                   {"h", 3600.0},
                   {"d", 86400.0}},
                  text);
}

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::optional<Section> section(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        return Section(*v, at(key));
    }

    template <class T>
    void number(const std::string& key, T& out) {
        const json* v = get(key);
        if (!v) return;
        if (!v->is_number()) throw ConfigError(at(key), "expected a number");
        if constexpr (std::is_integral_v<T>) {
            if (!v->is_number_integer() || (std::is_unsigned_v<T> && v->get<double>() < 0))
                throw ConfigError(at(key), "expected a nonnegative integer");
        }
        out = v->get<T>();
    }

    void boolean(const std::string& key, bool& out) {
        const json* v = get(key);
        if (!v) return;
        if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
        out = v->get<bool>();
    }

    // Number in base units, or a string with a unit suffix.
    double quantity(const json& v, const std::string& path, double (*parse)(const std::string&)) {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            try {
                return parse(v.get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw ConfigError(path, e.what());
            }
        }
        throw ConfigError(path, "expected a number or a string with units");
    }

    void quantity(const std::string& key, double& out, double (*parse)(const std::string&)) {
        if (const json* v = get(key)) out = quantity(*v, at(key), parse);
    }

    void quantity(const std::string& key, std::optional<double>& out,
                  double (*parse)(const std::string&)) {
        if (const json* v = get(key)) out = quantity(*v, at(key), parse);
    }

    std::vector<double> quantities(const std::string& key, double (*parse)(const std::string&)) {
        const json* v = get(key);
        std::vector<double> out;
        if (!v) return out;
        if (!v->is_array()) throw ConfigError(at(key), "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i)
            out.push_back(quantity((*v)[i], at(key) + "[" + std::to_string(i) + "]", parse));
        return out;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(at(k), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double plain(const std::string& s) {
    const auto uv = split_unit(s);
    if (!uv.unit.empty()) throw std::invalid_argument("unexpected unit in '" + s + "'");
    return uv.value;
}

void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) throw ConfigError(path, msg);
}

void read_video(Section& s, VideoUserParams& p) {
    if (const json* v = s.get("packet_size")) {
        const double bits = s.quantity(*v, s.at("packet_size"), parse_size);
        require(bits >= 1.0 && bits == std::floor(bits), s.at("packet_size"),
                "must be a positive whole number of bits");
        p.packet_size_bits = static_cast<std::uint64_t>(bits);
    }
    s.number("burst_size_mean", p.burst_size_mean);
    s.number("burst_size_dispersion", p.burst_size_dispersion);
    if (const json* v = s.get("dispersion_kind")) {
        const std::string k = v->is_string() ? v->get<std::string>() : "";
        if (k == "std") p.dispersion_kind = DispersionKind::StdDev;
        else if (k == "variance") p.dispersion_kind = DispersionKind::Variance;
        else throw ConfigError(s.at("dispersion_kind"), "expected \"std\" or \"variance\"");
    }
    s.quantity("interburst_mean", p.interburst_mean_s, parse_duration);
    s.quantity("interpacket_mean", p.interpacket_mean_s, parse_duration);
    s.quantity("interuse_mean", p.interuse_mean_s, parse_duration);
    if (const json* v = s.get("session_lengths")) {
        const std::string path = s.at("session_lengths");
        require(v->is_array() && !v->empty(), path, "expected a nonempty array");
        p.session_lengths.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            Section e((*v)[i], path + "[" + std::to_string(i) + "]");
            SessionLength sl{0.0, 0.0};
            require(e.has("duration") && e.has("probability"), e.at(""),
                    "needs duration and probability");
            e.quantity("duration", sl.duration_s, parse_duration);
            e.number("probability", sl.probability);
            e.finish();
            p.session_lengths.push_back(sl);
        }
    }
    s.finish();
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(s.at(""), e.what());
    }
}

void read_traffic(Section& s, TrafficConfig& t) {
    s.number("users", t.users);
    s.number("seed", t.seed);
    s.quantity("t0", t.horizon.t0, parse_duration);
    if (const json* v = s.get("horizon"))
        t.horizon.t1 = t.horizon.t0 + s.quantity(*v, s.at("horizon"), parse_duration);
    require(t.horizon.t1 > t.horizon.t0, s.at("horizon"), "must be positive");
    s.boolean("per_user_traces", t.per_user_traces);
    s.quantity("target_rho", t.target_rho, plain);
    if (t.target_rho) require(*t.target_rho > 0.0, s.at("target_rho"), "must be positive");
    if (auto v = s.section("video")) read_video(*v, t.video);
    s.finish();
}

void read_queue(Section& s, QueueConfig& q) {
    s.quantity("mu", q.mu, parse_rate);
    require(q.mu > 0.0, s.at("mu"), "must be positive");
    if (const json* v = s.get("alpha")) {
        if (v->is_string() && v->get<std::string>() == "auto") {
            q.alpha.reset();
        } else {
            require(v->is_number() && v->get<double>() > 0.0, s.at("alpha"),
                    "expected \"auto\" or a positive number (s/bit)");
            q.alpha = v->get<double>();
        }
    }
    s.quantity("q0", q.q0, parse_size);
    require(q.q0 >= 0.0, s.at("q0"), "must be >= 0");
    s.quantity("capacity", q.capacity, parse_size);
    if (q.capacity) require(*q.capacity > 0.0, s.at("capacity"), "must be positive");
    std::optional<double> h0, n;
    s.number("h0", h0.emplace(-1.0));
    if (*h0 < 0.0) h0.reset();
    s.number("gate_n", n.emplace(-1.0));
    if (*n < 0.0) n.reset();
    if (h0 || n) {
        require(q.capacity.has_value(), s.at("h0"), "gate parameters need a capacity");
        const double k = *q.capacity;
        q.gate = FiniteQueueParams{h0.value_or(1.0), n.value_or(500.0 / k)};
        require(q.gate->h0 > 0.0 && q.gate->h0 <= 1.0, s.at("h0"), "must lie in (0, 1]");
        require(q.gate->n > 0.0, s.at("gate_n"), "must be positive");
        if (!h0) q.gate.reset();  // h0 still derives from the inflow maximum
    }
    s.finish();
}

void read_solver(Section& s, SolverConfig& c) {
    s.number("rel_tol", c.options.rel_tol);
    s.number("abs_tol", c.options.abs_tol);
    require(c.options.rel_tol > 0.0, s.at("rel_tol"), "must be positive");
    require(c.options.abs_tol > 0.0, s.at("abs_tol"), "must be positive");
    s.quantity("max_step", c.options.max_step, parse_duration);
    s.quantity("output_dt", c.options.output_dt, parse_duration);
    s.quantity("dt", c.dt, parse_duration);
    require(c.dt > 0.0, s.at("dt"), "must be positive");
    s.finish();
}

void read_validation(Section& s, ValidationConfig& v) {
    s.quantity("sample_dt", v.sample_dt, parse_duration);
    if (v.sample_dt) require(*v.sample_dt > 0.0, s.at("sample_dt"), "must be positive");
    s.boolean("des", v.des);
    s.finish();
}

std::vector<std::optional<double>> optional_list(Section& s, const std::string& key) {
    std::vector<std::optional<double>> out;
    for (double v : s.quantities(key, plain)) out.emplace_back(v);
    return out;
}

void read_network(Section& s, NetworkConfig& n) {
    Topology& t = n.topology;
    if (s.has("access_rates")) t.access_rates = s.quantities("access_rates", parse_rate);
    s.quantity("core_rate", t.core_rate, parse_rate);
    s.quantity("core_capacity", t.core_capacity, parse_size);
    {
        std::optional<double> h0, gn;
        s.number("core_h0", h0.emplace(-1.0));
        s.number("core_gate_n", gn.emplace(-1.0));
        if (*h0 >= 0.0 || *gn >= 0.0) {
            require(*h0 >= 0.0, s.at("core_h0"), "needed together with core_gate_n");
            t.core_gate = FiniteQueueParams{*h0, *gn >= 0.0 ? *gn : 500.0 / t.core_capacity};
        }
    }
    if (s.has("egress_rates")) t.egress_rates = s.quantities("egress_rates", parse_rate);
    if (const json* v = s.get("routing")) {
        const std::string path = s.at("routing");
        require(v->is_array(), path, "expected an array of rows");
        t.routing.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& row = (*v)[i];
            require(row.is_array(), path + "[" + std::to_string(i) + "]", "expected an array");
            std::vector<double> r;
            for (std::size_t j = 0; j < row.size(); ++j) {
                require(row[j].is_number(),
                        path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                        "expected a number");
                r.push_back(row[j].get<double>());
            }
            t.routing.push_back(std::move(r));
        }
    }
    s.quantity("packet_size", t.packet_size_bits, parse_size);
    if (const json* v = s.get("transit_divisor")) {
        const std::string d = v->is_string() ? v->get<std::string>() : "";
        if (d == "core") t.transit_divisor = TransitDivisor::Core;
        else if (d == "access") t.transit_divisor = TransitDivisor::Access;
        else throw ConfigError(s.at("transit_divisor"), "expected \"core\" or \"access\"");
    }
    if (s.has("access_alpha")) t.access_alpha = optional_list(s, "access_alpha");
    if (const json* v = s.get("core_alpha")) {
        require(v->is_number(), s.at("core_alpha"), "expected a number (s/bit)");
        t.core_alpha = v->get<double>();
    }
    if (s.has("egress_alpha")) t.egress_alpha = optional_list(s, "egress_alpha");
    s.number("users_per_flow", n.users_per_flow);
    s.number("simulated_users", n.simulated_users);
    s.quantity("flow_mean_rate", n.flow_mean_rate, parse_rate);
    s.boolean("full_generation", n.full_generation);
    if (auto p = s.section("priority")) {
        n.priority.rates = p->quantities("rates", parse_rate);
        for (std::size_t i = 0; i < n.priority.rates.size(); ++i)
            require(n.priority.rates[i] >= 0.0, p->at("rates"), "rates must be >= 0");
        if (const json* v = p->get("egress_share")) {
            if (v->is_string() && v->get<std::string>() == "uniform") {
                n.priority.share_uniform = true;
            } else if (v->is_string() && v->get<std::string>() == "none") {
                n.priority.share_uniform = false;
                n.priority.egress_share.clear();
            } else {
                n.priority.share_uniform = false;
                n.priority.egress_share = p->quantities("egress_share", plain);
            }
        }
        p->finish();
    }
    s.finish();

    if (n.priority.share_uniform)
        n.priority.egress_share.assign(t.destinations(),
                                       1.0 / static_cast<double>(t.destinations()));
    t.priority_egress_share = n.priority.egress_share;
    try {
        t.validate();
    } catch (const std::exception& e) {
        throw ConfigError(s.at(""), e.what());
    }
    require(n.simulated_users > 0, s.at("simulated_users"), "must be positive");
}

void read_sweep(Section& s, SweepConfig& c) {
    c.interuse_scales = s.quantities("interuse_scales", plain);
    c.target_rho = s.quantities("target_rho", plain);
    for (double v : c.interuse_scales) require(v > 0.0, s.at("interuse_scales"), "must be positive");
    for (double v : c.target_rho) require(v > 0.0, s.at("target_rho"), "must be positive");
    require(c.interuse_scales.empty() || c.target_rho.empty(), s.at(""),
            "give either interuse_scales or target_rho, not both");
    s.finish();
}

}  // namespace

Topology reference_topology() {
    Topology t;
    t.access_rates.assign(4, 25e9);
    t.core_rate = 100e9;
    t.core_capacity = 25.0 * 8e9;
    t.egress_rates.assign(5, 20e9);
    t.routing = {{0.1293, 0.3124, 0.0548, 0.2534, 0.2501},
                 {0.1600, 0.1681, 0.0497, 0.2203, 0.4019},
                 {0.3029, 0.0009, 0.1687, 0.2224, 0.3051},
                 {0.0042, 0.3710, 0.2344, 0.0250, 0.3655}};
    // The printed rows are rounded to 4 decimals; the last one sums to 1.0001.
    for (auto& row : t.routing) {
        double sum = 0.0;
        for (double v : row) sum += v;
        for (double& v : row) v /= sum;
    }
    t.packet_size_bits = 11712;
    return t;
}

ScenarioConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    ScenarioConfig cfg;
    Section top(root, "");
    if (auto s = top.section("traffic")) read_traffic(*s, cfg.traffic);
    if (auto s = top.section("queue")) read_queue(*s, cfg.queue);
    if (auto s = top.section("solver")) read_solver(*s, cfg.solver);
    if (auto s = top.section("validation")) read_validation(*s, cfg.validation);
    if (auto s = top.section("network")) {
        NetworkConfig n;
        n.topology = reference_topology();
        n.flow_mean_rate = 12.5e9;
        n.priority.rates = {0, 5e9, 10e9, 15e9, 18e9, 20e9};
        read_network(*s, n);
        cfg.network = std::move(n);
    }
    if (auto s = top.section("sweep")) read_sweep(*s, cfg.sweep);
    top.finish();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("<file>", "cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fluidq::app
