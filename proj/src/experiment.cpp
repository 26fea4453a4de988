#include "tsync/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace tsync {

namespace {

std::string nodes_json(const RunResult& r) {
    nlohmann::ordered_json j;
    j["rounds"] = r.rounds;
    j["beacons"] = r.count(MessageType::Beacon);
    j["reports"] = r.count(MessageType::Report);
    j["samples"] = r.samples.size();
    j["undelivered"] = r.undelivered;
    j["rejected_reports"] = r.rejected_reports;
    j["head_fp_ops"] = r.head_fp_ops;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : r.sensors) {
        arr.push_back({{"node_id", s.id},
                       {"hop", s.hop},
                       {"skew_initial", s.clock.skew},
                       {"skew_final", s.final_skew},
                       {"offset_seconds", s.clock.offset},
                       {"ratio_full_final", s.ratio_full_final},
                       {"ratio_sensor_final", s.ratio_sensor_final},
                       {"precision_loss", s.precision_loss},
                       {"fp_ops", s.fp_ops},
                       {"measurements", s.measurements}});
    }
    j["sensors"] = arr;
    return j.dump(2) + "\n";
}

/// Runs fn(i) for i in [0, n) on a small pool; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, unsigned parallel, Fn fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(n)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            {
                std::lock_guard lock(mu);
                if (failure) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

RunOutput run_experiment(const ScenarioConfig& config, const std::string& run_id) {
    RunOutput out;
    out.run_id = run_id;
    out.config = config;
    out.result = run(config);
    out.rows = to_rows(run_id, config, out.result.samples);
    out.summary = summarize(out.rows, config.duration_seconds, config.trim_fraction);
    return out;
}

void write_run(const RunOutput& out, const std::filesystem::path& dir) {
    write_samples(out.rows, dir / "samples.csv");
    write_summary(out.summary, out.config.duration_seconds, out.config.trim_fraction, dir / "summary.json");
    write_file(dir / "histogram.csv", histogram_csv(histogram(out.result.samples)));
    write_file(dir / "nodes.json", nodes_json(out.result));
    write_file(dir / "config.json", scenario_to_json(out.config));
}

std::vector<ManifestEntry> run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir, unsigned parallel) {
    const auto points = enumerate(spec);
    for (const auto& p : points) p.config.validate();
    std::vector<ManifestEntry> manifest(points.size());
    std::vector<std::vector<SampleRow>> rows(points.size());
    parallel_for(points.size(), parallel, [&](std::size_t i) {
        const auto& p = points[i];
        auto out = run_experiment(p.config, p.run_id);
        write_run(out, out_dir / p.run_id);
        manifest[i] = ManifestEntry{p.index,        p.run_id,         std::string(to_string(p.config.scheme)),
                                    p.config.si_seconds, p.config.hops, p.config.rng_seed, p.run_id};
        rows[i] = std::move(out.rows);
    });

    nlohmann::ordered_json m;
    m["points"] = nlohmann::ordered_json::array();
    for (const auto& e : manifest) {
        m["points"].push_back({{"index", e.index},
                               {"run_id", e.run_id},
                               {"scheme", e.scheme},
                               {"si_seconds", e.si_seconds},
                               {"hops", e.hops},
                               {"seed", e.seed},
                               {"samples_csv", e.directory + "/samples.csv"},
                               {"summary_json", e.directory + "/summary.json"}});
    }
    write_file(out_dir / "manifest.json", m.dump(2) + "\n");

    std::vector<SampleRow> pooled;
    for (auto& r : rows) pooled.insert(pooled.end(), r.begin(), r.end());
    const auto& b = spec.base;
    write_summary(summarize(pooled, b.duration_seconds, b.trim_fraction), b.duration_seconds, b.trim_fraction,
                  out_dir / "summary.json");
    return manifest;
}

std::vector<CompareRow> run_compare(const ScenarioConfig& base, const std::vector<double>& si_values,
                                    const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                                    unsigned parallel) {
    SweepSpec spec;
    spec.base = base;
    spec.schemes = {SchemeMode::EeAscfr, SchemeMode::Ahts};
    spec.si_seconds = si_values;
    spec.seeds = seeds;
    const auto manifest = run_sweep(spec, out_dir, parallel);

    std::vector<CompareRow> out;
    for (auto scheme : spec.schemes) {
        for (double si : si_values) {
            std::vector<ErrorSample> pooled;
            std::size_t n = 0;
            for (const auto& e : manifest) {
                if (e.scheme != to_string(scheme) || e.si_seconds != si) continue;
                ++n;
                for (const auto& r : read_samples(out_dir / e.directory / "samples.csv")) {
                    ErrorSample s;
                    s.node = static_cast<NodeId>(r.node_id);
                    s.hop = r.hop;
                    s.event_ref_time = ReferenceTime{r.event_ref_time_s};
                    s.error = r.error_s;
                    pooled.push_back(s);
                }
            }
            out.push_back(CompareRow{std::string(to_string(scheme)), si,
                                     trimmed_stats(pooled, base.duration_seconds, base.trim_fraction), n});
        }
    }

    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : out) {
        j["rows"].push_back({{"scheme", r.scheme},
                             {"si_s", r.si_s},
                             {"mae_s", r.stats.mae},
                             {"mse_s2", r.stats.mse},
                             {"count", r.stats.count},
                             {"seeds", r.seeds},
                             {"trim_fraction", r.stats.trim_fraction}});
    }
    write_file(out_dir / "compare.json", j.dump(2) + "\n");
    std::string csv = "scheme,si_s,mae_s,mse_s2,count,seeds\n";
    for (const auto& r : out) {
        csv += r.scheme + "," + format_double(r.si_s) + "," + format_double(r.stats.mae) + "," +
               format_double(r.stats.mse) + "," + std::to_string(r.stats.count) + "," + std::to_string(r.seeds) + "\n";
    }
    write_file(out_dir / "compare.csv", csv);
    return out;
}

std::string compare_table(const std::vector<CompareRow>& rows) {
    std::string out = "scheme     si_s    MAE (us)     MSE (us^2)    samples\n";
    char line[160];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-9s %6s %11.4f %14.4f %10zu\n", r.scheme.c_str(), format_double(r.si_s).c_str(),
                      r.stats.mae * 1e6, r.stats.mse * 1e12, r.stats.count);
        out += line;
    }
    return out;
}

}  // namespace tsync
