#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tsync/simnet.hpp"

namespace tsync {

/// Lists over each sweep axis; an empty list keeps the base value.
struct SweepSpec {
    ScenarioConfig base;
    std::vector<double> si_seconds;
    std::vector<SchemeMode> schemes;
    std::vector<unsigned> hops;
    std::vector<std::uint64_t> seeds;
};

struct SweepPoint {
    std::size_t index = 0;
    std::string run_id;
    ScenarioConfig config;
};

/// Cartesian product in scheme, si, hops, seed order.
std::vector<SweepPoint> enumerate(const SweepSpec& spec);

/// JSON scenario text to config. Unknown keys and wrong types raise
/// ConfigError. Does not run validate().
ScenarioConfig parse_scenario(const std::string& text);
/// Optional "sweep" object in the same file; absent axes stay empty.
SweepSpec parse_sweep(const std::string& text);

std::string scenario_to_json(const ScenarioConfig& config);

std::string read_text_file(const std::filesystem::path& path);

/// Stable run identifier, e.g. "ahts_si1_h3_s42".
std::string make_run_id(const ScenarioConfig& config);

}  // namespace tsync
