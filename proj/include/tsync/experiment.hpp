#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tsync/config.hpp"
#include "tsync/results_io.hpp"
#include "tsync/simnet.hpp"

namespace tsync {

struct RunOutput {
    std::string run_id;
    ScenarioConfig config;
    RunResult result;
    std::vector<SampleRow> rows;
    Summary summary;
};

RunOutput run_experiment(const ScenarioConfig& config, const std::string& run_id);

/// samples.csv, summary.json, histogram.csv, nodes.json and the echoed
/// config.json under `dir`.
void write_run(const RunOutput& out, const std::filesystem::path& dir);

struct ManifestEntry {
    std::size_t index = 0;
    std::string run_id;
    std::string scheme;
    double si_seconds = 0.0;
    unsigned hops = 0;
    std::uint64_t seed = 0;
    std::string directory;
};

/// Runs every point on up to `parallel` threads, one subdirectory each, then
/// writes manifest.json and a pooled summary.json. Returns manifest order.
std::vector<ManifestEntry> run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir, unsigned parallel);

struct CompareRow {
    std::string scheme;
    double si_s = 0.0;
    ErrorStats stats;
    std::size_t seeds = 0;
};

/// Both schemes over each SI on identical seeds; stats pool every hop and seed.
std::vector<CompareRow> run_compare(const ScenarioConfig& base, const std::vector<double>& si_values,
                                    const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                                    unsigned parallel);

std::string compare_table(const std::vector<CompareRow>& rows);

}  // namespace tsync
