#include "tsync/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tsync {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void get(const json& obj, const char* key, T& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        if constexpr (std::is_unsigned_v<T>) {
            if (!it->is_number_unsigned()) throw ConfigError(where + "." + key + ": expected a non-negative integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw ConfigError(where + "." + key + ": expected a number");
        }
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

DelayDist parse_dist(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ConfigError(where + ": expected an object with a string 'kind'");
    }
    const auto kind = j["kind"].get<std::string>();
    DelayDist d;
    if (kind == "constant") {
        check_keys(j, {"kind", "value_seconds"}, where);
        d.kind = DelayDist::Kind::Constant;
        get(j, "value_seconds", d.a, where);
    } else if (kind == "uniform") {
        check_keys(j, {"kind", "lo_seconds", "hi_seconds"}, where);
        d.kind = DelayDist::Kind::Uniform;
        get(j, "lo_seconds", d.a, where);
        get(j, "hi_seconds", d.b, where);
    } else if (kind == "gaussian") {
        check_keys(j, {"kind", "mean_seconds", "sd_seconds"}, where);
        d.kind = DelayDist::Kind::Gaussian;
        get(j, "mean_seconds", d.a, where);
        get(j, "sd_seconds", d.b, where);
    } else {
        throw ConfigError(where + ": unknown delay kind '" + kind + "'");
    }
    return d;
}

json dist_to_json(const DelayDist& d) {
    switch (d.kind) {
        case DelayDist::Kind::Constant: return {{"kind", "constant"}, {"value_seconds", d.a}};
        case DelayDist::Kind::Uniform: return {{"kind", "uniform"}, {"lo_seconds", d.a}, {"hi_seconds", d.b}};
        case DelayDist::Kind::Gaussian: return {{"kind", "gaussian"}, {"mean_seconds", d.a}, {"sd_seconds", d.b}};
    }
    return {};
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

SchemeMode scheme_from(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    try {
        return parse_scheme(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

ScenarioConfig scenario_from(const json& j) {
    check_keys(j,
               {"scheme", "si_seconds", "duration_seconds", "bundle_size", "measurements_per_si", "hops", "rng_seed",
                "trim_fraction", "clock", "sensor_clocks", "delay", "processing_seconds", "forward_seconds",
                "loss_probability", "sweep"},
               "config");
    ScenarioConfig c;
    if (j.contains("scheme")) c.scheme = scheme_from(j["scheme"], "config.scheme");
    get(j, "si_seconds", c.si_seconds, "config");
    get(j, "duration_seconds", c.duration_seconds, "config");
    get(j, "bundle_size", c.bundle_size, "config");
    get(j, "measurements_per_si", c.measurements_per_si, "config");
    get(j, "hops", c.hops, "config");
    get(j, "rng_seed", c.rng_seed, "config");
    get(j, "trim_fraction", c.trim_fraction, "config");
    get(j, "processing_seconds", c.processing_seconds, "config");
    get(j, "forward_seconds", c.forward_seconds, "config");
    get(j, "loss_probability", c.loss_probability, "config");
    if (j.contains("clock")) {
        const auto& k = j["clock"];
        check_keys(k, {"skew_max_ppm", "offset_max_seconds", "drift_rate_ppm_per_sqrt_s", "drift_step_seconds"},
                   "config.clock");
        get(k, "skew_max_ppm", c.skew_max_ppm, "config.clock");
        get(k, "offset_max_seconds", c.offset_max_seconds, "config.clock");
        get(k, "drift_rate_ppm_per_sqrt_s", c.drift_rate_ppm_per_sqrt_s, "config.clock");
        get(k, "drift_step_seconds", c.drift_step_seconds, "config.clock");
    }
    if (j.contains("sensor_clocks")) {
        const auto& arr = j["sensor_clocks"];
        if (!arr.is_array()) throw ConfigError("config.sensor_clocks: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "config.sensor_clocks[" + std::to_string(i) + "]";
            check_keys(arr[i], {"skew_ppm", "offset_seconds", "drift_rate_ppm_per_sqrt_s", "drift_step_seconds",
                                "drift_seed"},
                       where);
            ClockParams p;
            double skew_ppm = 0.0;
            get(arr[i], "skew_ppm", skew_ppm, where);
            p.skew = skew_ppm * 1e-6;
            get(arr[i], "offset_seconds", p.offset, where);
            get(arr[i], "drift_rate_ppm_per_sqrt_s", p.drift_rate_std, where);
            get(arr[i], "drift_step_seconds", p.drift_step, where);
            get(arr[i], "drift_seed", p.drift_seed, where);
            c.sensor_clocks.push_back(p);
        }
    }
    if (j.contains("delay")) {
        const auto& d = j["delay"];
        check_keys(d, {"propagation_seconds", "interrupt_tx", "interrupt_rx"}, "config.delay");
        get(d, "propagation_seconds", c.delay.propagation, "config.delay");
        if (d.contains("interrupt_tx")) c.delay.interrupt_tx = parse_dist(d["interrupt_tx"], "config.delay.interrupt_tx");
        if (d.contains("interrupt_rx")) c.delay.interrupt_rx = parse_dist(d["interrupt_rx"], "config.delay.interrupt_rx");
    }
    return c;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) { return scenario_from(parse_json(text)); }

SweepSpec parse_sweep(const std::string& text) {
    const json j = parse_json(text);
    SweepSpec spec;
    spec.base = scenario_from(j);
    if (!j.contains("sweep")) return spec;
    const auto& s = j["sweep"];
    check_keys(s, {"si_seconds", "scheme", "hops", "seeds"}, "config.sweep");
    auto list = [&](const char* key) -> const json* {
        if (!s.contains(key)) return nullptr;
        if (!s[key].is_array()) throw ConfigError(std::string("config.sweep.") + key + ": expected an array");
        return &s[key];
    };
    if (const auto* a = list("si_seconds")) {
        for (const auto& v : *a) {
            if (!v.is_number()) throw ConfigError("config.sweep.si_seconds: expected numbers");
            spec.si_seconds.push_back(v.get<double>());
        }
    }
    if (const auto* a = list("scheme")) {
        for (const auto& v : *a) spec.schemes.push_back(scheme_from(v, "config.sweep.scheme"));
    }
    if (const auto* a = list("hops")) {
        for (const auto& v : *a) {
            if (!v.is_number_unsigned()) throw ConfigError("config.sweep.hops: expected non-negative integers");
            spec.hops.push_back(v.get<unsigned>());
        }
    }
    if (const auto* a = list("seeds")) {
        for (const auto& v : *a) {
            if (!v.is_number_unsigned()) throw ConfigError("config.sweep.seeds: expected non-negative integers");
            spec.seeds.push_back(v.get<std::uint64_t>());
        }
    }
    return spec;
}

std::string scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["scheme"] = std::string(to_string(c.scheme));
    j["si_seconds"] = c.si_seconds;
    j["duration_seconds"] = c.duration_seconds;
    j["bundle_size"] = c.bundle_size;
    j["measurements_per_si"] = c.measurements_per_si;
    j["hops"] = c.hops;
    j["rng_seed"] = c.rng_seed;
    j["trim_fraction"] = c.trim_fraction;
    j["clock"] = {{"skew_max_ppm", c.skew_max_ppm},
                  {"offset_max_seconds", c.offset_max_seconds},
                  {"drift_rate_ppm_per_sqrt_s", c.drift_rate_ppm_per_sqrt_s},
                  {"drift_step_seconds", c.drift_step_seconds}};
    if (!c.sensor_clocks.empty()) {
        json arr = json::array();
        for (const auto& p : c.sensor_clocks) {
            arr.push_back({{"skew_ppm", p.skew * 1e6},
                           {"offset_seconds", p.offset},
                           {"drift_rate_ppm_per_sqrt_s", p.drift_rate_std},
                           {"drift_step_seconds", p.drift_step},
                           {"drift_seed", p.drift_seed}});
        }
        j["sensor_clocks"] = arr;
    }
    j["delay"] = {{"propagation_seconds", c.delay.propagation},
                  {"interrupt_tx", dist_to_json(c.delay.interrupt_tx)},
                  {"interrupt_rx", dist_to_json(c.delay.interrupt_rx)}};
    j["processing_seconds"] = c.processing_seconds;
    j["forward_seconds"] = c.forward_seconds;
    j["loss_probability"] = c.loss_probability;
    return j.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string make_run_id(const ScenarioConfig& c) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, c.si_seconds);
    std::string si(buf, r.ptr);
    for (auto& ch : si) {
        if (ch == '.') ch = 'p';
    }
    std::string scheme(to_string(c.scheme));
    return scheme + "_si" + si + "_h" + std::to_string(c.hops) + "_s" + std::to_string(c.rng_seed);
}

std::vector<SweepPoint> enumerate(const SweepSpec& spec) {
    const auto& b = spec.base;
    const std::vector<SchemeMode> schemes = spec.schemes.empty() ? std::vector{b.scheme} : spec.schemes;
    const std::vector<double> sis = spec.si_seconds.empty() ? std::vector{b.si_seconds} : spec.si_seconds;
    const std::vector<unsigned> hops = spec.hops.empty() ? std::vector{b.hops} : spec.hops;
    const std::vector<std::uint64_t> seeds = spec.seeds.empty() ? std::vector{b.rng_seed} : spec.seeds;
    std::vector<SweepPoint> out;
    std::set<std::string> seen;
    for (auto sc : schemes) {
        for (double si : sis) {
            for (unsigned h : hops) {
                for (auto seed : seeds) {
                    SweepPoint p;
                    p.index = out.size();
                    p.config = b;
                    p.config.scheme = sc;
                    p.config.si_seconds = si;
                    p.config.hops = h;
                    p.config.rng_seed = seed;
                    p.run_id = make_run_id(p.config);
                    if (!seen.insert(p.run_id).second) throw ConfigError("sweep: duplicate axis point " + p.run_id);
                    out.push_back(std::move(p));
                }
            }
        }
    }
    return out;
}

}  // namespace tsync
