#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tsync/clock.hpp"
#include "tsync/messages.hpp"
#include "tsync/precision.hpp"

namespace tsync {

/// Per-link estimates for mapping the lower node's clock onto the upper's.
struct EstimatorState {
    Ticks t1_zero{};          // upper clock at the anchor round
    Ticks t2_zero{};          // lower clock at the anchor round
    double ratio_est = 1.0;   // (T2_k - T2_0) / (T1_k - T1_0)
    double offset_est = 0.0;  // seconds, lower clock vs ratio-scaled upper clock
    double delay_est = 0.0;   // seconds, one-way propagation plus interrupt delay
    std::uint32_t last_round = 0;
    bool ready = false;       // anchors and estimates populated
};

/// Ordered from the head's direct child down to the measurement's origin.
using TranslationChain = std::vector<EstimatorState>;

/// Cumulative-ratio frequency estimate. The tick differences are exact
/// integers; in Single mode the quotient is stored as the nearest binary32.
/// Throws std::invalid_argument unless t1_k > t1_zero.
double cr_ratio(Ticks t1_zero, Ticks t2_zero, Ticks t1_k, Ticks t2_k, PrecisionMode mode);

struct OffsetDelay {
    double offset = 0.0;  // seconds
    double delay = 0.0;   // seconds
};

/// Symmetric-split two-way estimates with the lower node's turnaround scaled
/// by the ratio:
///   delay  = ((t4 - t1) - (t3 - t2) / r) / 2
///   offset = ((t2 - r t1) + (t3 - r t4)) / 2
/// For T_lower = r T_upper + c and equal one-way delays d these give c and d
/// exactly. Throws std::invalid_argument for a round trip below -2 ticks
/// (ordering violation) or a non-positive ratio.
OffsetDelay offset_delay(const SyncRecord& rec, double ratio);

/// Maps a lower-clock coordinate (real microseconds) onto the upper clock:
/// t1_zero + delay + (x - t2_zero) / ratio.
double map_to_upper_us(double lower_us, const EstimatorState& est);

/// Single-hop translation into reference seconds.
/// Throws std::invalid_argument if t_m precedes t2_zero or est is not ready.
ReferenceTime translate_timestamp(Ticks t_m, const EstimatorState& est);

/// Folds map_to_upper_us from the origin hop upward without re-quantizing.
/// Throws std::invalid_argument for an empty chain or a hop without estimates.
ReferenceTime translate_chain(Ticks t_m, std::span<const EstimatorState> chain);

/// Computational error Psi = -(elapsed) * epsilon, in seconds.
double predicted_error(std::int64_t elapsed_ticks, PrecisionLoss eps);

/// Head-side estimator for one link. Keeps a short per-round history so a
/// bundle can be translated with the estimates of the round it travelled with.
class LinkEstimator {
public:
    /// unit_ratio: the lower node's timestamps are already frequency corrected
    /// (EE-ASCFR logical clocks), so no ratio is estimated.
    LinkEstimator(NodeId upper, NodeId lower, bool unit_ratio, FpUnit* fpu = nullptr);

    void add_record(const SyncRecord& rec);
    /// Anchors are immutable once latched; later calls are ignored.
    void set_anchor(const Anchor& anchor);

    [[nodiscard]] bool anchored() const { return anchor_latched_; }
    [[nodiscard]] bool anchor_known() const { return anchor_.has_value(); }
    [[nodiscard]] std::optional<EstimatorState> state_for(std::uint32_t round) const;
    [[nodiscard]] std::optional<EstimatorState> latest() const;
    [[nodiscard]] NodeId upper() const { return upper_; }
    [[nodiscard]] NodeId lower() const { return lower_; }

private:
    void refresh();
    EstimatorState estimate(const SyncRecord& rec, double ratio) const;
    void prune();

    NodeId upper_;
    NodeId lower_;
    bool unit_ratio_;
    FpUnit* fpu_;
    std::optional<Anchor> anchor_;
    bool anchor_latched_ = false;
    Ticks t1_zero_{};
    Ticks t2_zero_{};
    std::optional<double> first_ratio_;
    std::map<std::uint32_t, SyncRecord> records_;
    std::map<std::uint32_t, EstimatorState> states_;
};

}  // namespace tsync
