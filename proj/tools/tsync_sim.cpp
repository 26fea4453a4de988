// tsync_sim: run, sweep and compare time-synchronization scenarios.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsync/config.hpp"
#include "tsync/experiment.hpp"

using namespace tsync;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 1;

int cmd_run(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed) {
    auto cfg = parse_scenario(read_text_file(path));
    if (seed) cfg.rng_seed = *seed;
    cfg.validate();
    const auto result = run_experiment(cfg, make_run_id(cfg));
    write_run(result, out);
    std::printf("%s: %zu samples, %zu beacons, %zu reports -> %s\n", result.run_id.c_str(), result.rows.size(),
                result.result.count(MessageType::Beacon), result.result.count(MessageType::Report), out.c_str());
    for (const auto& [key, g] : result.summary) {
        std::printf("  %s  mae=%.4f us  mse=%.4f us^2  n=%zu\n", group_name(key).c_str(), g.stats.mae * 1e6,
                    g.stats.mse * 1e12, g.stats.count);
    }
    return 0;
}

int cmd_sweep(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed, unsigned parallel) {
    auto spec = parse_sweep(read_text_file(path));
    if (seed) spec.seeds = {*seed};
    const auto manifest = run_sweep(spec, out, parallel);
    std::printf("%zu runs -> %s/manifest.json\n", manifest.size(), out.c_str());
    return 0;
}

int cmd_compare(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed, unsigned parallel,
                std::vector<double> si, unsigned seed_count) {
    auto cfg = parse_scenario(read_text_file(path));
    if (seed) cfg.rng_seed = *seed;
    std::vector<std::uint64_t> seeds;
    for (unsigned i = 0; i < seed_count; ++i) seeds.push_back(cfg.rng_seed + i);
    const auto rows = run_compare(cfg, si, seeds, out, parallel);
    std::fputs(compare_table(rows).c_str(), stdout);
    return 0;
}

int cmd_validate(const std::string& path) {
    const auto spec = parse_sweep(read_text_file(path));
    spec.base.validate();
    const auto points = enumerate(spec);
    for (const auto& p : points) p.config.validate();
    std::printf("%s: ok (%zu sweep point%s)\n", path.c_str(), points.size(), points.size() == 1 ? "" : "s");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator for EE-ASCFR and AHTS time synchronization"};
    app.require_subcommand(1);

    std::string config;
    std::string out = "results";
    std::optional<std::uint64_t> seed;
    unsigned parallel = 1;
    std::vector<double> si{1.0, 10.0, 100.0};
    unsigned seed_count = 1;

    auto* run = app.add_subcommand("run", "execute one scenario; writes samples CSV and summary JSON");
    auto* sweep = app.add_subcommand("sweep", "iterate the config's sweep axes into a results directory");
    auto* compare = app.add_subcommand("compare", "both schemes on identical seeds over several SI values");
    auto* validate = app.add_subcommand("validate-config", "check a config file without running it");

    for (auto* sub : {run, sweep, compare, validate}) {
        sub->add_option("--config", config, "scenario JSON file")->required()->check(CLI::ExistingFile);
    }
    for (auto* sub : {run, sweep, compare}) {
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override rng_seed");
    }
    for (auto* sub : {sweep, compare}) {
        sub->add_option("--parallel", parallel, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    }
    compare->add_option("--si", si, "SI values in seconds")->capture_default_str();
    compare->add_option("--seeds", seed_count, "seeds per point, counting up from rng_seed")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(config, out, seed);
        if (*sweep) return cmd_sweep(config, out, seed, parallel);
        if (*compare) return cmd_compare(config, out, seed, parallel, si, seed_count);
        if (*validate) return cmd_validate(config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return 0;
}
