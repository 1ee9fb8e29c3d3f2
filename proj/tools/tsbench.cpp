#include "tsbench/demand.hpp"
#include "tsbench/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace tsbench;

namespace {

struct Overrides {
    std::string config;
    std::string manifest;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<int> threads;
    std::string output;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--manifest", o.manifest, "rerun the configuration recorded in a manifest.json")
        ->check(CLI::ExistingFile);
    cmd->add_option("-s,--seed", o.seed, "override seed_base");
    cmd->add_option("-r,--replications", o.replications, "override the replication count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("-j,--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    cmd->add_option("-o,--output", o.output, "output directory (relative paths go under $TSBENCH_OUT)");
    cmd->add_flag("-q,--quiet", o.quiet, "no progress output");
}

harness::RunConfig resolve(const Overrides& o, harness::Mode mode) {
    harness::RunConfig c;
    if (!o.manifest.empty()) {
        std::ifstream in(o.manifest);
        const auto j = nlohmann::json::parse(in);
        if (!j.contains("config")) {
            throw harness::ConfigError("config", "manifest has no config section");
        }
        c = harness::config_from_json(j["config"]);
    } else if (!o.config.empty()) {
        c = harness::load_config(o.config);
    }
    c.mode = mode;
    if (o.seed) c.seed_base = *o.seed;
    if (o.replications) c.replications = *o.replications;
    if (o.threads) c.threads = *o.threads;
    if (!o.output.empty()) c.output_dir = o.output;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo benchmark of one-step forecasters on simulated and queueing series"};
    app.require_subcommand(1);
    Overrides o;

    struct Sub {
        const char* name;
        const char* help;
        harness::Mode mode;
    };
    const Sub subs[] = {
        {"generate", "simulate one series per data setting into series/*.csv", harness::Mode::Simulate},
        {"run", "evaluate the configured grid; writes metrics.csv, replications.csv, ranks.csv",
         harness::Mode::Evaluate},
        {"rank", "median-rank table from an existing metrics.csv", harness::Mode::Rank},
        {"realdata", "rolling-origin evaluation on the demand dataset", harness::Mode::RealData},
        {"plot", "SVG figures from an existing metrics.csv", harness::Mode::Plot},
    };
    std::vector<std::pair<CLI::App*, harness::Mode>> cmds;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, o);
        cmds.emplace_back(cmd, s.mode);
    }
    bool show_config = false;
    app.add_flag("--print-config", show_config, "print the resolved configuration and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        harness::Mode mode = harness::Mode::Evaluate;
        for (const auto& [cmd, m] : cmds) {
            if (cmd->parsed()) mode = m;
        }
        const harness::RunConfig cfg = resolve(o, mode);
        if (show_config) {
            std::cout << harness::config_to_json(cfg).dump(2) << "\n";
            return 0;
        }
        std::size_t last_pct = 101;
        harness::Progress progress;
        if (!o.quiet) {
            progress = [&](std::size_t done, std::size_t total) {
                const std::size_t pct = done * 100 / total;
                if (pct != last_pct) {
                    last_pct = pct;
                    std::cerr << "\r" << pct << "% (" << done << "/" << total << ")" << std::flush;
                }
            };
        }
        const auto summary = harness::run(cfg, progress);
        if (!o.quiet && mode == harness::Mode::Evaluate) std::cerr << "\n";
        std::cout << harness::to_string(cfg.mode) << ": " << summary.settings << " settings, " << summary.fit_failures
                  << " fit failures\n";
        for (const auto& f : summary.files) std::cout << "  " << f.string() << "\n";
        return 0;
    } catch (const harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const harness::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
