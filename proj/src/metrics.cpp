#include "tsync/metrics.hpp"

#include <cmath>

namespace tsync {

ErrorStats trimmed_stats(std::span<const ErrorSample> samples, double duration, double trim_fraction) {
    if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) {
        throw std::invalid_argument("trimmed_stats: trim_fraction must be in [0, 1)");
    }
    const double cutoff = trim_fraction * duration;
    ErrorStats st;
    st.trim_fraction = trim_fraction;
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (const auto& s : samples) {
        if (s.event_ref_time.seconds < cutoff) continue;
        abs_sum += std::fabs(s.error);
        sq_sum += s.error * s.error;
        ++st.count;
    }
    if (st.count == 0) throw std::domain_error("trimmed_stats: no samples after trimming");
    st.mae = abs_sum / static_cast<double>(st.count);
    st.mse = sq_sum / static_cast<double>(st.count);
    return st;
}

double Histogram::in_range() const {
    double p = 0.0;
    for (const auto& b : bins) p += b.second;
    return p;
}

Histogram histogram(std::span<const ErrorSample> samples, double bin_width, std::pair<double, double> range) {
    const auto [lo, hi] = range;
    if (!(bin_width > 0.0) || !(lo < hi)) throw std::invalid_argument("histogram: need bin_width > 0 and lo < hi");
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - 1e-9));
    Histogram h;
    std::vector<std::size_t> counts(n, 0);
    std::size_t below = 0;
    std::size_t above = 0;
    for (const auto& s : samples) {
        if (s.error < lo) {
            ++below;
        } else if (s.error >= hi) {
            ++above;
        } else {
            auto i = static_cast<std::size_t>(std::floor((s.error - lo) / bin_width));
            counts[std::min(i, n - 1)]++;
        }
    }
    const double total = samples.empty() ? 1.0 : static_cast<double>(samples.size());
    for (std::size_t i = 0; i < n; ++i) {
        h.bins.emplace_back(lo + (static_cast<double>(i) + 0.5) * bin_width, static_cast<double>(counts[i]) / total);
    }
    h.below = static_cast<double>(below) / total;
    h.above = static_cast<double>(above) / total;
    return h;
}

double error_growth_slope(std::span<const ErrorSample> samples) {
    if (samples.size() < 2) throw std::domain_error("error_growth_slope: need at least two samples");
    double mt = 0.0;
    double me = 0.0;
    for (const auto& s : samples) {
        mt += s.event_ref_time.seconds;
        me += s.error;
    }
    mt /= static_cast<double>(samples.size());
    me /= static_cast<double>(samples.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : samples) {
        const double dt = s.event_ref_time.seconds - mt;
        sxx += dt * dt;
        sxy += dt * (s.error - me);
    }
    if (sxx == 0.0) throw std::domain_error("error_growth_slope: all samples share one time");
    return sxy / sxx;
}

}  // namespace tsync
