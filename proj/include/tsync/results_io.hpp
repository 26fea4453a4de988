#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tsync/metrics.hpp"
#include "tsync/simnet.hpp"

namespace tsync {

/// One line of the samples CSV.
struct SampleRow {
    std::string run_id;
    std::string scheme;
    double si_s = 0.0;
    unsigned node_id = 0;
    unsigned hop = 0;
    double event_ref_time_s = 0.0;
    double t_est_s = 0.0;
    double error_s = 0.0;
};

struct GroupKey {
    std::string scheme;
    double si_s = 0.0;
    unsigned hop = 0;
    auto operator<=>(const GroupKey&) const = default;
};

struct GroupSummary {
    ErrorStats stats;
    double slope = 0.0;  // s/s over trimmed samples, 0 if degenerate
};

using Summary = std::map<GroupKey, GroupSummary>;

std::vector<SampleRow> to_rows(const std::string& run_id, const ScenarioConfig& config,
                               const std::vector<ErrorSample>& samples);

/// Groups by (scheme, si_s, hop); groups empty after trimming are omitted.
Summary summarize(const std::vector<SampleRow>& rows, double duration, double trim_fraction);

/// Shortest round-trip decimal form.
std::string format_double(double x);
std::string group_name(const GroupKey& key);

std::string samples_csv(const std::vector<SampleRow>& rows);
std::vector<SampleRow> parse_samples_csv(const std::string& text);
std::string summary_json(const Summary& summary, double duration, double trim_fraction);
std::string histogram_csv(const Histogram& h);

/// Writes text, creating parent directories; errors carry the path.
void write_file(const std::filesystem::path& path, const std::string& text);

void write_samples(const std::vector<SampleRow>& rows, const std::filesystem::path& path);
std::vector<SampleRow> read_samples(const std::filesystem::path& path);
void write_summary(const Summary& summary, double duration, double trim_fraction, const std::filesystem::path& path);

}  // namespace tsync
