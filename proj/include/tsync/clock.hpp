#pragma once

#include <compare>
#include <cstdint>
#include <random>

#include "tsync/precision.hpp"

namespace tsync {

inline constexpr double kTicksPerSecond = 1e6;  // 1 us hardware resolution

/// Seconds on the head's reference clock since the simulation epoch.
struct ReferenceTime {
    double seconds = 0.0;
    auto operator<=>(const ReferenceTime&) const = default;
};

/// Raw microsecond count of a hardware timer.
struct Ticks {
    std::uint64_t value = 0;
    auto operator<=>(const Ticks&) const = default;
};

/// Signed difference a - b in ticks.
inline std::int64_t ticks_between(Ticks a, Ticks b) {
    return static_cast<std::int64_t>(a.value - b.value);
}

inline double to_seconds(double ticks) { return ticks / kTicksPerSecond; }

/// Floors a real-valued microsecond coordinate onto the tick grid.
/// Throws std::domain_error for negative or non-finite input.
Ticks quantize(long double microseconds);

/// Affine oscillator parameters: T(t) = (1 + skew) t + offset.
struct ClockParams {
    double skew = 0.0;            // dimensionless, e.g. 50e-6
    double offset = 0.0;          // seconds
    double drift_rate_std = 0.0;  // ppm per sqrt(second), random walk on skew
    double drift_step = 1.0;      // seconds between random-walk steps
    std::uint64_t drift_seed = 0;

    /// Throws std::invalid_argument when 1 + skew <= 0 or drift_rate_std < 0.
    void validate() const;
};

/// Read-through view of a node oscillator driven by reference time.
class HardwareClock {
public:
    explicit HardwareClock(ClockParams params);

    /// Reads the counter at reference time t. Throws std::logic_error if t
    /// precedes the previous read.
    Ticks read(ReferenceTime t);

    [[nodiscard]] const ClockParams& params() const { return params_; }
    [[nodiscard]] double current_skew() const { return current_skew_; }
    [[nodiscard]] ReferenceTime last_update() const { return last_update_; }

private:
    void advance_drift(double t);

    ClockParams params_;
    double current_skew_;
    ReferenceTime last_update_{};
    // Drift path: phase in microseconds at the last grid step.
    double grid_time_ = 0.0;
    long double grid_phase_us_ = 0.0L;
    std::mt19937_64 rng_;
    std::normal_distribution<double> unit_normal_{0.0, 1.0};
};

/// Software clock derived from a hardware clock. Logical values are kept as
/// real-valued microseconds; the API reports seconds.
struct LogicalClockState {
    Ticks anchor_local{};          // T(t0)
    double anchor_logical_us = 0;  // logical value at t0
    Ticks prev_local{};            // T(t_k)
    double prev_logical_us = 0;    // logical value at t_k
    double ratio_est = 1.0;        // 1 + estimated skew, stored at node width

    [[nodiscard]] double anchor_logical() const { return to_seconds(anchor_logical_us); }
    [[nodiscard]] double prev_logical() const { return to_seconds(prev_logical_us); }
};

/// Recursive update: prev_logical + (now - prev_local) / ratio, the offset
/// term being zero. In Single mode the ratio is held in binary32.
/// Throws std::invalid_argument if local_now < prev_local.
double logical_recursive(const LogicalClockState& state, Ticks local_now, PrecisionMode mode);

/// Anchored update: anchor_logical + (now - anchor_local) / ratio.
/// Throws std::invalid_argument if local_now < anchor_local.
double logical_anchored(const LogicalClockState& state, Ticks local_now, PrecisionMode mode);

/// Microsecond-valued variants used by the node state machines.
double logical_recursive_us(const LogicalClockState& state, Ticks local_now, PrecisionMode mode);
double logical_anchored_us(const LogicalClockState& state, Ticks local_now, PrecisionMode mode);

}  // namespace tsync
