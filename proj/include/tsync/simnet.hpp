#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsync/clock.hpp"
#include "tsync/messages.hpp"

namespace tsync {

/// A scenario parameter violates a constraint; the message names it.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Interrupt latency distribution, seconds. Gaussian samples are redrawn
/// until non-negative.
struct DelayDist {
    enum class Kind { Constant, Uniform, Gaussian };
    Kind kind = Kind::Constant;
    double a = 0.0;  // value | lower bound | mean
    double b = 0.0;  // unused | upper bound | standard deviation

    static DelayDist constant(double v) { return {Kind::Constant, v, 0.0}; }
    static DelayDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static DelayDist gaussian(double mean, double sd) { return {Kind::Gaussian, mean, sd}; }

    void validate(const std::string& name) const;
    /// Practical upper bound (mean + 8 sd for the Gaussian).
    [[nodiscard]] double bound() const;
    double sample(std::mt19937_64& rng) const;
};

struct DelayModel {
    double propagation = 1e-6;
    DelayDist interrupt_tx = DelayDist::gaussian(5e-6, 2e-6);
    DelayDist interrupt_rx = DelayDist::gaussian(5e-6, 2e-6);

    void validate() const;
    [[nodiscard]] double bound() const { return propagation + interrupt_tx.bound() + interrupt_rx.bound(); }
};

/// One-way latency: propagation plus both interrupt latencies.
double sample_delay(const DelayModel& model, std::mt19937_64& rng);

struct ScenarioConfig {
    SchemeMode scheme = SchemeMode::Ahts;
    double si_seconds = 1.0;
    double duration_seconds = 3600.0;
    unsigned bundle_size = 5;
    unsigned measurements_per_si = 5;
    unsigned hops = 1;  // sensors in the chain below the head
    std::uint64_t rng_seed = 1;
    double trim_fraction = 0.1;

    // Clock sampler, used for sensors without an explicit entry.
    double skew_max_ppm = 50.0;
    double offset_max_seconds = 1.0;
    double drift_rate_ppm_per_sqrt_s = 0.0;
    double drift_step_seconds = 1.0;
    /// Explicit per-sensor clocks, indexed by hop - 1. May be empty.
    std::vector<ClockParams> sensor_clocks;

    DelayModel delay;
    double processing_seconds = 1e-3;  // measurement to report turnaround
    double forward_seconds = 1e-3;     // gateway relay turnaround
    double loss_probability = 0.0;

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
    [[nodiscard]] std::uint32_t rounds() const;
};

struct ErrorSample {
    NodeId node = 0;
    unsigned hop = 0;
    std::uint32_t seq = 0;
    ReferenceTime event_ref_time;
    ReferenceTime est_ref_time;
    double error = 0.0;  // estimate - truth, seconds
};

struct MessageRecord {
    MessageType kind = MessageType::Beacon;
    std::uint32_t round = 0;
    NodeId from = 0;
    NodeId to = 0;
    double send_time = 0.0;
    double recv_time = 0.0;
    std::size_t bytes = 0;
    std::size_t measurements = 0;  // own plus relayed bundle entries
    bool lost = false;
};

struct SensorDiagnostics {
    NodeId id = 0;
    unsigned hop = 0;
    ClockParams clock;
    double final_skew = 0.0;
    double ratio_full_final = 1.0;    // double ratio on the raw first/last pairs
    double ratio_sensor_final = 1.0;  // ratio the sensor carried (EE-ASCFR)
    double precision_loss = 0.0;      // epsilon of ratio_full_final
    std::size_t fp_ops = 0;
    std::size_t measurements = 0;
};

struct RunResult {
    std::vector<ErrorSample> samples;
    std::vector<MessageRecord> messages;
    std::vector<SensorDiagnostics> sensors;
    std::size_t head_fp_ops = 0;
    std::uint32_t rounds = 0;
    std::size_t undelivered = 0;      // measurements without an estimate at the end
    std::size_t rejected_reports = 0;  // dropped by the head after message loss

    [[nodiscard]] std::size_t count(MessageType kind) const;
};

/// Runs one scenario to quiescence. Deterministic given the config.
RunResult run(const ScenarioConfig& config);

}  // namespace tsync
