#include "tsync/nodes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsync {

ReportResponse gateway_forward(const ReportResponse& incoming, const SyncRecord& lower_link,
                               ReportResponse outgoing) {
    outgoing.relayed_sync.push_back(lower_link);
    outgoing.relayed_sync.insert(outgoing.relayed_sync.end(), incoming.relayed_sync.begin(),
                                 incoming.relayed_sync.end());
    outgoing.relayed_bundles.push_back(RelayedBundle{incoming.origin, incoming.anchor, incoming.bundle});
    outgoing.relayed_bundles.insert(outgoing.relayed_bundles.end(), incoming.relayed_bundles.begin(),
                                    incoming.relayed_bundles.end());
    return outgoing;
}

// ---------------------------------------------------------------- sensor

SensorNode::SensorNode(SensorSettings settings)
    : settings_(settings),
      fpu_(settings.scheme == SchemeMode::EeAscfr ? PrecisionMode::Single : PrecisionMode::Double) {
    if (settings_.bundle_size == 0) {
        throw std::invalid_argument("sensor: bundle size must be at least 1");
    }
}

Ticks SensorNode::stamp(Ticks hardware) {
    if (settings_.scheme == SchemeMode::Ahts || !anchor_) {
        return hardware;
    }
    const double logical = fpu_.eval([&](PrecisionMode mode) { return logical_anchored_us(logical_, hardware, mode); });
    return Ticks{static_cast<std::uint64_t>(std::floor(logical))};
}

bool SensorNode::on_beacon(const BeaconRequest& beacon, Ticks local_rx) {
    if (beacon.origin != settings_.upper) {
        throw ProtocolError("sensor " + std::to_string(settings_.id) + ": beacon from non-upper node " +
                            std::to_string(beacon.origin));
    }
    if (has_round_ && beacon.round <= round_) {
        return false;
    }
    if (!anchor_) {
        anchor_ = Anchor{beacon.round, local_rx};
        raw_t1_zero_ = beacon.t1;
        logical_ = LogicalClockState{local_rx, static_cast<double>(local_rx.value), local_rx,
                                     static_cast<double>(local_rx.value), 1.0};
    } else if (settings_.scheme == SchemeMode::EeAscfr) {
        const double ratio = fpu_.eval([&](PrecisionMode mode) {
            return cr_ratio(raw_t1_zero_, anchor_->t2_zero, beacon.t1, local_rx, mode);
        });
        logical_.prev_logical_us = fpu_.eval([&](PrecisionMode mode) { return logical_anchored_us(logical_, local_rx, mode); });
        logical_.prev_local = local_rx;
        logical_.ratio_est = ratio;
    }
    if (first_report_round_ && beacon.round > *first_report_round_) {
        anchor_acked_ = true;
    }
    round_ = beacon.round;
    has_round_ = true;
    responded_ = false;
    t1_raw_ = beacon.t1;
    t2_raw_ = local_rx;
    t2_stamp_ = stamp(local_rx);
    since_beacon_ = 0;
    return true;
}

Measurement SensorNode::record_measurement(Ticks local) {
    Measurement m{next_seq_++, stamp(local)};
    bundle_.push_back(m);
    ++since_beacon_;
    return m;
}

bool SensorNode::report_due() const {
    if (!has_round_ || responded_ || since_beacon_ < settings_.measurements_per_round) {
        return false;
    }
    if (!settings_.child) return true;
    return child_round_seen_ && *child_round_seen_ >= round_;
}

ReportResponse SensorNode::emit_report(Ticks local_tx) {
    if (!has_round_) {
        throw ProtocolError("sensor " + std::to_string(settings_.id) + ": report before any beacon");
    }
    ReportResponse rep;
    rep.origin = settings_.id;
    rep.round = round_;
    rep.t2 = t2_stamp_;
    rep.t3 = stamp(local_tx);
    if (!anchor_acked_) rep.anchor = anchor_;
    const auto take = std::min(bundle_.size(), settings_.bundle_size);
    rep.bundle.assign(bundle_.begin(), bundle_.begin() + static_cast<std::ptrdiff_t>(take));
    bundle_.erase(bundle_.begin(), bundle_.begin() + static_cast<std::ptrdiff_t>(take));
    for (const auto& relay : relays_) {
        rep = gateway_forward(relay.incoming, relay.link, std::move(rep));
    }
    relays_.clear();
    responded_ = true;
    if (!first_report_round_) first_report_round_ = round_;
    return rep;
}

BeaconRequest SensorNode::make_child_beacon(std::uint32_t round, Ticks local_tx) {
    if (!settings_.child) {
        throw ProtocolError("sensor " + std::to_string(settings_.id) + " has no child");
    }
    const Ticks t1 = stamp(local_tx);
    child_t1_[round] = t1;
    while (child_t1_.size() > 64) child_t1_.erase(child_t1_.begin());
    return BeaconRequest{round, t1, settings_.id};
}

void SensorNode::on_child_report(const ReportResponse& report, Ticks local_rx) {
    if (!settings_.child || report.origin != *settings_.child) {
        throw ProtocolError("sensor " + std::to_string(settings_.id) + ": report from unknown node " +
                            std::to_string(report.origin));
    }
    const auto it = child_t1_.find(report.round);
    if (it == child_t1_.end()) {
        throw ProtocolError("sensor " + std::to_string(settings_.id) + ": no beacon sent for round " +
                            std::to_string(report.round));
    }
    SyncRecord link{report.round, settings_.id, report.origin, it->second, report.t2, report.t3, stamp(local_rx)};
    relays_.push_back(StagedRelay{report, link});
    child_round_seen_ = std::max(child_round_seen_.value_or(0), report.round);
}

std::optional<SyncRecord> SensorNode::raw_anchor_pair() const {
    if (!anchor_) return std::nullopt;
    SyncRecord r;
    r.round = anchor_->round;
    r.upper = settings_.upper;
    r.lower = settings_.id;
    r.t1 = raw_t1_zero_;
    r.t2 = anchor_->t2_zero;
    return r;
}

std::optional<SyncRecord> SensorNode::raw_latest_pair() const {
    if (!has_round_) return std::nullopt;
    SyncRecord r;
    r.round = round_;
    r.upper = settings_.upper;
    r.lower = settings_.id;
    r.t1 = t1_raw_;
    r.t2 = t2_raw_;
    return r;
}

// ------------------------------------------------------------------ head

HeadNode::HeadNode(SchemeMode scheme, std::map<NodeId, NodeId> parent_of)
    : scheme_(scheme), parent_of_(std::move(parent_of)) {}

BeaconRequest HeadNode::emit_beacon(std::uint32_t round, Ticks now) {
    if (last_round_ && round != *last_round_ + 1) {
        throw ProtocolError("head: beacon round " + std::to_string(round) + " does not follow " +
                            std::to_string(*last_round_));
    }
    last_round_ = round;
    t1_by_round_[round] = now;
    while (t1_by_round_.size() > 64) t1_by_round_.erase(t1_by_round_.begin());
    return BeaconRequest{round, now, kHeadId};
}

LinkEstimator& HeadNode::link_for(NodeId lower) {
    const auto parent = parent_of_.find(lower);
    if (parent == parent_of_.end()) {
        throw ProtocolError("head: unknown node " + std::to_string(lower));
    }
    auto it = links_.find(lower);
    if (it == links_.end()) {
        it = links_.emplace(lower, LinkEstimator(parent->second, lower, scheme_ == SchemeMode::EeAscfr, &fpu_)).first;
    }
    return it->second;
}

const LinkEstimator* HeadNode::link(NodeId lower) const {
    const auto it = links_.find(lower);
    return it == links_.end() ? nullptr : &it->second;
}

std::vector<NodeId> HeadNode::path_to(NodeId node) const {
    std::vector<NodeId> path;
    NodeId cur = node;
    while (cur != kHeadId) {
        const auto it = parent_of_.find(cur);
        if (it == parent_of_.end() || path.size() > parent_of_.size()) {
            throw ProtocolError("head: no path to node " + std::to_string(node));
        }
        path.push_back(cur);
        cur = it->second;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

bool HeadNode::try_translate(const Pending& p, std::vector<Estimate>& out) const {
    TranslationChain chain;
    chain.reserve(p.hops.size());
    for (const auto& [lower, round] : p.hops) {
        const auto* est = link(lower);
        if (!est) return false;
        auto state = est->state_for(round);
        if (!state) return false;
        chain.push_back(*state);
    }
    for (const auto& m : p.bundle) {
        out.push_back(Estimate{p.origin, m, translate_chain(m.t_m, chain)});
    }
    return true;
}

std::vector<Estimate> HeadNode::on_report(const ReportResponse& report, Ticks local_rx) {
    const auto parent = parent_of_.find(report.origin);
    if (parent == parent_of_.end() || parent->second != kHeadId) {
        throw ProtocolError("head: report from unknown origin " + std::to_string(report.origin));
    }
    const auto t1 = t1_by_round_.find(report.round);
    if (t1 == t1_by_round_.end()) {
        throw ProtocolError("head: report for round " + std::to_string(report.round) + " never beaconed");
    }
    auto& own = link_for(report.origin);
    if (!own.anchor_known() && !report.anchor) {
        throw ProtocolError("head: first report from node " + std::to_string(report.origin) + " lacks t2_zero");
    }
    own.add_record(SyncRecord{report.round, kHeadId, report.origin, t1->second, report.t2, report.t3, local_rx});
    if (report.anchor) own.set_anchor(*report.anchor);

    std::map<NodeId, std::uint32_t> rounds{{report.origin, report.round}};
    for (const auto& rec : report.relayed_sync) {
        auto& l = link_for(rec.lower);
        if (l.upper() != rec.upper) {
            throw ProtocolError("head: relayed record for link not in topology");
        }
        l.add_record(rec);
        auto [it, inserted] = rounds.try_emplace(rec.lower, rec.round);
        if (!inserted) it->second = std::max(it->second, rec.round);
    }

    auto make_pending = [&](NodeId origin, const std::vector<Measurement>& bundle) {
        Pending p{origin, {}, bundle};
        for (NodeId hop : path_to(origin)) {
            const auto r = rounds.find(hop);
            if (r == rounds.end()) {
                throw ProtocolError("head: bundle from node " + std::to_string(origin) +
                                    " arrived without a record for link to " + std::to_string(hop));
            }
            p.hops.emplace_back(hop, r->second);
        }
        return p;
    };

    std::vector<Pending> fresh;
    if (!report.bundle.empty()) fresh.push_back(make_pending(report.origin, report.bundle));
    for (const auto& rb : report.relayed_bundles) {
        auto& l = link_for(rb.origin);
        if (rb.anchor) l.set_anchor(*rb.anchor);
        if (!l.anchor_known()) {
            throw ProtocolError("head: first relayed bundle from node " + std::to_string(rb.origin) +
                                " lacks t2_zero");
        }
        if (!rb.bundle.empty()) fresh.push_back(make_pending(rb.origin, rb.bundle));
    }

    std::vector<Estimate> out;
    std::vector<Pending> still;
    for (auto& p : pending_) {
        if (!try_translate(p, out)) still.push_back(std::move(p));
    }
    for (auto& p : fresh) {
        if (!try_translate(p, out)) still.push_back(std::move(p));
    }
    pending_ = std::move(still);
    return out;
}

}  // namespace tsync
