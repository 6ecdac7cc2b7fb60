// fluidq: traffic generation, logistic queue simulation, validation against
// a discrete event simulator, intensity sweeps and the two-tier network model.

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "fluidq/app/commands.hpp"
#include "fluidq/app/config.hpp"

namespace app = fluidq::app;

int main(int argc, char** argv) {
    CLI::App cli{"Fluid-flow logistic queue toolkit"};
    cli.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    cli.add_option("--config", config_path, "Scenario JSON file (defaults apply when omitted)");
    cli.add_option("--out", out_dir, "Output directory")->capture_default_str();
    cli.add_option("--seed", seed, "Override traffic.seed");
    cli.add_option("--workers", workers, "Worker threads (0: all cores)")->capture_default_str();

    using Command = std::vector<std::filesystem::path> (*)(const app::ScenarioConfig&,
                                                            const app::RunContext&);
    const std::vector<std::tuple<const char*, const char*, Command>> commands = {
        {"generate", "Generate packet traces and the aggregated inflow", app::cmd_generate},
        {"simulate", "Integrate the logistic queue on a generated inflow", app::cmd_simulate},
        {"validate", "Compare the logistic queue against the discrete event simulator",
         app::cmd_validate},
        {"sweep", "Run validate over an intensity grid", app::cmd_sweep},
        {"dt", "Two-tier network latency and priority sweep", app::cmd_dt},
    };
    Command chosen = nullptr;
    for (const auto& [name, help, fn] : commands) {
        auto* sub = cli.add_subcommand(name, help);
        sub->callback([&chosen, fn = fn] { chosen = fn; });
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e);
    }

    try {
        app::ScenarioConfig cfg =
            config_path.empty() ? app::parse_config("{}") : app::load_config(config_path);
        if (seed) cfg.traffic.seed = *seed;
        if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
        const auto written = chosen(cfg, app::RunContext{out_dir, workers});
        for (const auto& p : written) std::cout << p.string() << '\n';
        return 0;
    } catch (const app::ConfigError& e) {
        std::cerr << "config error at " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
