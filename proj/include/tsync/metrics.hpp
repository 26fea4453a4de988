#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tsync/simnet.hpp"

namespace tsync {

struct ErrorStats {
    double mae = 0.0;  // seconds
    double mse = 0.0;  // seconds^2
    std::size_t count = 0;
    double trim_fraction = 0.0;
};

/// Drops samples with event_ref_time < trim_fraction * duration, then
/// computes MAE and MSE. Throws std::domain_error if nothing survives.
ErrorStats trimmed_stats(std::span<const ErrorSample> samples, double duration, double trim_fraction);

struct Histogram {
    std::vector<std::pair<double, double>> bins;  // (center, probability)
    double below = 0.0;  // mass under lo
    double above = 0.0;  // mass at or over hi
    [[nodiscard]] double in_range() const;
};

/// Probabilities are fractions of all samples, so in_range() + below + above = 1.
Histogram histogram(std::span<const ErrorSample> samples, double bin_width = 1e-6,
                    std::pair<double, double> range = {-10e-6, 10e-6});

/// Least-squares slope of error against event_ref_time (s/s).
/// Throws std::domain_error for fewer than two samples or a single time.
double error_growth_slope(std::span<const ErrorSample> samples);

}  // namespace tsync
