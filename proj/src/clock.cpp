#include "tsync/clock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tsync {

Ticks quantize(long double microseconds) {
    if (!std::isfinite(microseconds) || microseconds < 0.0L) {
        throw std::domain_error("quantize: clock value must be finite and non-negative");
    }
    return Ticks{static_cast<std::uint64_t>(std::floor(microseconds))};
}

void ClockParams::validate() const {
    if (!(1.0 + skew > 0.0)) {
        throw std::invalid_argument("clock: 1 + skew must be positive");
    }
    if (!(drift_rate_std >= 0.0)) {
        throw std::invalid_argument("clock: drift_rate_std must be >= 0");
    }
    if (drift_rate_std > 0.0 && !(drift_step > 0.0)) {
        throw std::invalid_argument("clock: drift_step must be > 0");
    }
}

HardwareClock::HardwareClock(ClockParams params)
    : params_(params), current_skew_(params.skew), rng_(params.drift_seed) {
    params_.validate();
    grid_phase_us_ = static_cast<long double>(params_.offset) * 1e6L;
}

void HardwareClock::advance_drift(double t) {
    const double sigma = params_.drift_rate_std * 1e-6 * std::sqrt(params_.drift_step);
    while (grid_time_ + params_.drift_step <= t) {
        grid_phase_us_ += (1.0L + current_skew_) * static_cast<long double>(params_.drift_step) * 1e6L;
        grid_time_ += params_.drift_step;
        current_skew_ += sigma * unit_normal_(rng_);
        if (1.0 + current_skew_ <= 0.0) {
            throw std::logic_error("clock: drift drove the frequency ratio non-positive");
        }
    }
}

Ticks HardwareClock::read(ReferenceTime t) {
    if (t < last_update_) {
        throw std::logic_error("clock: read at t=" + std::to_string(t.seconds) +
                               " precedes last read at t=" + std::to_string(last_update_.seconds));
    }
    last_update_ = t;
    if (params_.drift_rate_std == 0.0) {
        const long double tl = t.seconds;
        return quantize((1.0L + params_.skew) * tl * 1e6L + static_cast<long double>(params_.offset) * 1e6L);
    }
    advance_drift(t.seconds);
    const long double since = static_cast<long double>(t.seconds) - grid_time_;
    return quantize(grid_phase_us_ + (1.0L + current_skew_) * since * 1e6L);
}

namespace {

double divide_elapsed(std::int64_t elapsed, double ratio, PrecisionMode mode) {
    if (!(ratio > 0.0)) {
        throw std::invalid_argument("logical clock: ratio_est must be positive");
    }
    return static_cast<double>(elapsed) / narrow(ratio, mode);
}

}  // namespace

double logical_recursive_us(const LogicalClockState& state, Ticks local_now, PrecisionMode mode) {
    if (local_now < state.prev_local) {
        throw std::invalid_argument("logical_recursive: local time precedes previous sync");
    }
    return state.prev_logical_us + divide_elapsed(ticks_between(local_now, state.prev_local), state.ratio_est, mode);
}

double logical_anchored_us(const LogicalClockState& state, Ticks local_now, PrecisionMode mode) {
    if (local_now < state.anchor_local) {
        throw std::invalid_argument("logical_anchored: local time precedes the anchor");
    }
    return state.anchor_logical_us +
           divide_elapsed(ticks_between(local_now, state.anchor_local), state.ratio_est, mode);
}

double logical_recursive(const LogicalClockState& state, Ticks local_now, PrecisionMode mode) {
    return to_seconds(logical_recursive_us(state, local_now, mode));
}

double logical_anchored(const LogicalClockState& state, Ticks local_now, PrecisionMode mode) {
    return to_seconds(logical_anchored_us(state, local_now, mode));
}

}  // namespace tsync
