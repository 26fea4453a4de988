#include "tsync/results_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tsync/config.hpp"
#include "json.hpp"

namespace tsync {

namespace {

constexpr const char* kHeader = "run_id,scheme,si_s,node_id,hop,event_ref_time_s,t_est_s,error_s";

template <typename T>
T parse_field(const std::string& s, std::size_t line, const char* name) {
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw std::runtime_error("samples csv line " + std::to_string(line) + ": bad " + name + " '" + s + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string group_name(const GroupKey& k) {
    return "scheme=" + k.scheme + ",si_s=" + format_double(k.si_s) + ",hop=" + std::to_string(k.hop);
}

std::vector<SampleRow> to_rows(const std::string& run_id, const ScenarioConfig& config,
                               const std::vector<ErrorSample>& samples) {
    std::vector<SampleRow> rows;
    rows.reserve(samples.size());
    const std::string scheme(to_string(config.scheme));
    for (const auto& s : samples) {
        rows.push_back(SampleRow{run_id, scheme, config.si_seconds, s.node, s.hop, s.event_ref_time.seconds,
                                 s.est_ref_time.seconds, s.error});
    }
    return rows;
}

Summary summarize(const std::vector<SampleRow>& rows, double duration, double trim_fraction) {
    std::map<GroupKey, std::vector<ErrorSample>> groups;
    for (const auto& r : rows) {
        ErrorSample s;
        s.node = static_cast<NodeId>(r.node_id);
        s.hop = r.hop;
        s.event_ref_time = ReferenceTime{r.event_ref_time_s};
        s.est_ref_time = ReferenceTime{r.t_est_s};
        s.error = r.error_s;
        groups[GroupKey{r.scheme, r.si_s, r.hop}].push_back(s);
    }
    Summary out;
    const double cutoff = trim_fraction * duration;
    for (auto& [key, samples] : groups) {
        std::vector<ErrorSample> kept;
        for (const auto& s : samples) {
            if (s.event_ref_time.seconds >= cutoff) kept.push_back(s);
        }
        if (kept.empty()) continue;
        GroupSummary g;
        g.stats = trimmed_stats(kept, duration, trim_fraction);
        try {
            g.slope = error_growth_slope(kept);
        } catch (const std::domain_error&) {
            g.slope = 0.0;
        }
        out.emplace(key, g);
    }
    return out;
}

std::string samples_csv(const std::vector<SampleRow>& rows) {
    std::string out = kHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.run_id;
        out += ',';
        out += r.scheme;
        out += ',';
        out += format_double(r.si_s);
        out += ',';
        out += std::to_string(r.node_id);
        out += ',';
        out += std::to_string(r.hop);
        out += ',';
        out += format_double(r.event_ref_time_s);
        out += ',';
        out += format_double(r.t_est_s);
        out += ',';
        out += format_double(r.error_s);
        out += '\n';
    }
    return out;
}

std::vector<SampleRow> parse_samples_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("samples csv: missing or wrong header");
    std::vector<SampleRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 8) throw std::runtime_error("samples csv line " + std::to_string(n) + ": expected 8 fields");
        SampleRow r;
        r.run_id = f[0];
        r.scheme = f[1];
        r.si_s = parse_field<double>(f[2], n, "si_s");
        r.node_id = parse_field<unsigned>(f[3], n, "node_id");
        r.hop = parse_field<unsigned>(f[4], n, "hop");
        r.event_ref_time_s = parse_field<double>(f[5], n, "event_ref_time_s");
        r.t_est_s = parse_field<double>(f[6], n, "t_est_s");
        r.error_s = parse_field<double>(f[7], n, "error_s");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summary_json(const Summary& summary, double duration, double trim_fraction) {
    nlohmann::ordered_json j;
    j["duration_seconds"] = duration;
    j["trim_fraction"] = trim_fraction;
    nlohmann::ordered_json groups = nlohmann::ordered_json::object();
    for (const auto& [key, g] : summary) {
        groups[group_name(key)] = {{"scheme", key.scheme},
                                   {"si_s", key.si_s},
                                   {"hop", key.hop},
                                   {"mae_s", g.stats.mae},
                                   {"mse_s2", g.stats.mse},
                                   {"count", g.stats.count},
                                   {"trim_fraction", g.stats.trim_fraction},
                                   {"slope_s_per_s", g.slope}};
    }
    j["groups"] = groups;
    return j.dump(2) + "\n";
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_center_s,probability\n";
    for (const auto& [c, p] : h.bins) out += format_double(c) + "," + format_double(p) + "\n";
    out += "below," + format_double(h.below) + "\n";
    out += "above," + format_double(h.above) + "\n";
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_samples(const std::vector<SampleRow>& rows, const std::filesystem::path& path) {
    write_file(path, samples_csv(rows));
}

std::vector<SampleRow> read_samples(const std::filesystem::path& path) {
    try {
        return parse_samples_csv(read_text_file(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_summary(const Summary& summary, double duration, double trim_fraction, const std::filesystem::path& path) {
    write_file(path, summary_json(summary, duration, trim_fraction));
}

}  // namespace tsync
