#include "tsync/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsync {

double cr_ratio(Ticks t1_zero, Ticks t2_zero, Ticks t1_k, Ticks t2_k, PrecisionMode mode) {
    if (!(t1_k > t1_zero)) {
        throw std::invalid_argument("cr_ratio: t1_k must be later than t1_zero");
    }
    const auto num = ticks_between(t2_k, t2_zero);
    const auto den = ticks_between(t1_k, t1_zero);
    return narrow(static_cast<double>(num) / static_cast<double>(den), mode);
}

OffsetDelay offset_delay(const SyncRecord& rec, double ratio) {
    if (!(ratio > 0.0)) {
        throw std::invalid_argument("offset_delay: ratio must be positive");
    }
    const auto outbound = static_cast<double>(ticks_between(rec.t4, rec.t1));
    const auto turnaround = static_cast<double>(ticks_between(rec.t3, rec.t2)) / ratio;
    const double round_trip = outbound - turnaround;
    // Two ticks of quantization plus a 100 ppm ratio mismatch over the turnaround.
    const double tolerance = 2.0 + 1e-4 * std::fabs(turnaround);
    if (rec.t4 <= rec.t1 || rec.t3 < rec.t2 || round_trip < -tolerance) {
        throw std::invalid_argument("offset_delay: negative round trip on link " + std::to_string(rec.upper) +
                                    "->" + std::to_string(rec.lower) + " round " + std::to_string(rec.round));
    }
    const double t1 = static_cast<double>(rec.t1.value);
    const double t2 = static_cast<double>(rec.t2.value);
    const double t3 = static_cast<double>(rec.t3.value);
    const double t4 = static_cast<double>(rec.t4.value);
    OffsetDelay out;
    out.delay = to_seconds(std::max(0.0, round_trip / 2.0));
    out.offset = to_seconds(((t2 - ratio * t1) + (t3 - ratio * t4)) / 2.0);
    return out;
}

double map_to_upper_us(double lower_us, const EstimatorState& est) {
    return static_cast<double>(est.t1_zero.value) + est.delay_est * kTicksPerSecond +
           (lower_us - static_cast<double>(est.t2_zero.value)) / est.ratio_est;
}

ReferenceTime translate_timestamp(Ticks t_m, const EstimatorState& est) {
    if (!est.ready) {
        throw std::invalid_argument("translate_timestamp: estimates not populated");
    }
    if (t_m < est.t2_zero) {
        throw std::invalid_argument("translate_timestamp: measurement precedes the anchor");
    }
    return ReferenceTime{to_seconds(map_to_upper_us(static_cast<double>(t_m.value), est))};
}

ReferenceTime translate_chain(Ticks t_m, std::span<const EstimatorState> chain) {
    if (chain.empty()) {
        throw std::invalid_argument("translate_chain: empty chain");
    }
    if (t_m < chain.back().t2_zero) {
        throw std::invalid_argument("translate_chain: measurement precedes the origin anchor");
    }
    double x = static_cast<double>(t_m.value);
    for (auto hop = chain.rbegin(); hop != chain.rend(); ++hop) {
        if (!hop->ready) {
            throw std::invalid_argument("translate_chain: hop without estimates");
        }
        x = map_to_upper_us(x, *hop);
    }
    return ReferenceTime{to_seconds(x)};
}

double predicted_error(std::int64_t elapsed_ticks, PrecisionLoss eps) {
    return -to_seconds(static_cast<double>(elapsed_ticks) * eps.epsilon);
}

LinkEstimator::LinkEstimator(NodeId upper, NodeId lower, bool unit_ratio, FpUnit* fpu)
    : upper_(upper), lower_(lower), unit_ratio_(unit_ratio), fpu_(fpu) {}

void LinkEstimator::add_record(const SyncRecord& rec) {
    if (rec.lower != lower_ || rec.upper != upper_) {
        throw std::invalid_argument("LinkEstimator: record belongs to another link");
    }
    records_.try_emplace(rec.round, rec);  // keep first on duplicates
    refresh();
}

void LinkEstimator::set_anchor(const Anchor& anchor) {
    if (!anchor_) {
        anchor_ = anchor;
        refresh();
    }
}

EstimatorState LinkEstimator::estimate(const SyncRecord& rec, double ratio) const {
    const auto od = fpu_ ? fpu_->eval([&](PrecisionMode) { return offset_delay(rec, ratio); })
                         : offset_delay(rec, ratio);
    EstimatorState s;
    s.t1_zero = t1_zero_;
    s.t2_zero = t2_zero_;
    s.ratio_est = ratio;
    s.offset_est = od.offset;
    s.delay_est = od.delay;
    s.last_round = rec.round;
    s.ready = true;
    return s;
}

void LinkEstimator::refresh() {
    if (anchor_ && !anchor_latched_) {
        const auto it = records_.find(anchor_->round);
        if (it == records_.end()) return;
        t1_zero_ = it->second.t1;
        t2_zero_ = anchor_->t2_zero;
        anchor_latched_ = true;
    }
    if (!anchor_latched_) return;
    const std::uint32_t anchor_round = anchor_->round;
    for (const auto& [round, rec] : records_) {
        if (round <= anchor_round || states_.contains(round)) continue;
        double ratio = 1.0;
        if (!unit_ratio_) {
            auto compute = [&](PrecisionMode mode) { return cr_ratio(t1_zero_, t2_zero_, rec.t1, rec.t2, mode); };
            ratio = fpu_ ? fpu_->eval(compute) : compute(PrecisionMode::Double);
        }
        if (!first_ratio_) first_ratio_ = ratio;
        states_.emplace(round, estimate(rec, ratio));
    }
    if (!states_.contains(anchor_round) && first_ratio_) {
        const auto it = records_.find(anchor_round);
        if (unit_ratio_) {
            // Anchor-round stamps predate any ratio; borrow the first later round's delay.
            const auto later = states_.upper_bound(anchor_round);
            if (later != states_.end()) {
                auto s = later->second;
                s.last_round = anchor_round;
                states_.emplace(anchor_round, s);
            }
        } else if (it != records_.end()) {
            states_.emplace(anchor_round, estimate(it->second, *first_ratio_));
        }
    }
    prune();
}

void LinkEstimator::prune() {
    constexpr std::uint32_t kHistory = 32;
    if (records_.empty()) return;
    const std::uint32_t newest = records_.rbegin()->first;
    if (newest < kHistory) return;
    const std::uint32_t cutoff = newest - kHistory;
    std::erase_if(records_, [&](const auto& kv) { return kv.first < cutoff && states_.contains(kv.first); });
    std::erase_if(states_, [&](const auto& kv) { return kv.first < cutoff; });
}

std::optional<EstimatorState> LinkEstimator::state_for(std::uint32_t round) const {
    const auto it = states_.find(round);
    if (it == states_.end()) return std::nullopt;
    return it->second;
}

std::optional<EstimatorState> LinkEstimator::latest() const {
    if (states_.empty()) return std::nullopt;
    return states_.rbegin()->second;
}

}  // namespace tsync
