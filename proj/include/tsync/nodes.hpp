#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tsync/clock.hpp"
#include "tsync/estimation.hpp"
#include "tsync/messages.hpp"
#include "tsync/precision.hpp"

namespace tsync {

/// Violation of the message ordering the roles rely on.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Appends the lower link's record and the lower node's payload to `outgoing`.
/// Bundles are copied untouched; the gateway does no translation arithmetic.
ReportResponse gateway_forward(const ReportResponse& incoming, const SyncRecord& lower_link,
                               ReportResponse outgoing);

struct SensorSettings {
    NodeId id = 1;
    NodeId upper = kHeadId;
    std::optional<NodeId> child;
    SchemeMode scheme = SchemeMode::Ahts;
    std::size_t bundle_size = 5;
    unsigned measurements_per_round = 5;
};

/// A sensor; with a child it is also that child's gateway.
class SensorNode {
public:
    explicit SensorNode(SensorSettings settings);

    /// Handles a beacon from the upper node received at local hardware time
    /// local_rx. Returns false for a duplicate or stale round (kept first).
    bool on_beacon(const BeaconRequest& beacon, Ticks local_rx);

    /// Stages a measurement taken at local hardware time `local`.
    Measurement record_measurement(Ticks local);

    /// True while the current round still owes a response and every trigger
    /// (own measurements staged, child's report relayed) is satisfied.
    [[nodiscard]] bool report_due() const;
    /// True if the current round's response has not been sent yet.
    [[nodiscard]] bool response_outstanding() const { return has_round_ && !responded_; }

    /// Builds the report for the current round. Throws ProtocolError when no
    /// beacon has been received yet.
    ReportResponse emit_report(Ticks local_tx);

    /// Beacon toward the child for `round`, timestamped at local_tx.
    BeaconRequest make_child_beacon(std::uint32_t round, Ticks local_tx);

    /// Stages a child's report received at local_rx for forwarding.
    void on_child_report(const ReportResponse& report, Ticks local_rx);

    [[nodiscard]] NodeId id() const { return settings_.id; }
    [[nodiscard]] const SensorSettings& settings() const { return settings_; }
    [[nodiscard]] const FpUnit& fpu() const { return fpu_; }
    [[nodiscard]] double ratio_est() const { return logical_.ratio_est; }
    [[nodiscard]] bool anchored() const { return anchor_.has_value(); }
    /// Raw first and latest (t1, t2) pairs, for diagnostics.
    [[nodiscard]] std::optional<SyncRecord> raw_anchor_pair() const;
    [[nodiscard]] std::optional<SyncRecord> raw_latest_pair() const;

private:
    /// Node timestamp for a hardware reading: the reading itself under Ahts,
    /// the floored binary32-ratio logical clock under EeAscfr.
    Ticks stamp(Ticks hardware);

    struct StagedRelay {
        ReportResponse incoming;
        SyncRecord link;
    };

    SensorSettings settings_;
    FpUnit fpu_;
    LogicalClockState logical_;
    Ticks raw_t1_zero_{};
    std::optional<Anchor> anchor_;
    bool anchor_acked_ = false;
    std::optional<std::uint32_t> first_report_round_;

    bool has_round_ = false;
    bool responded_ = true;
    std::uint32_t round_ = 0;
    Ticks t1_raw_{};
    Ticks t2_raw_{};
    Ticks t2_stamp_{};
    unsigned since_beacon_ = 0;

    std::vector<Measurement> bundle_;
    std::uint32_t next_seq_ = 0;

    std::map<std::uint32_t, Ticks> child_t1_;
    std::optional<std::uint32_t> child_round_seen_;
    std::vector<StagedRelay> relays_;
};

/// Measurement time estimate produced at the head.
struct Estimate {
    NodeId node = 0;
    Measurement measurement;
    ReferenceTime estimate;
};

/// Resource-rich sink; owns every per-link estimator.
class HeadNode {
public:
    /// parent_of maps each sensor to its upper node (static chain topology).
    HeadNode(SchemeMode scheme, std::map<NodeId, NodeId> parent_of);

    /// Beacon for `round` at head time `now`. Rounds must increase by one.
    BeaconRequest emit_beacon(std::uint32_t round, Ticks now);

    /// Processes a report from a direct child received at local_rx. Returns
    /// the estimates that became computable, including earlier deferred ones.
    /// Throws ProtocolError for unknown origins or a missing anchor.
    std::vector<Estimate> on_report(const ReportResponse& report, Ticks local_rx);

    [[nodiscard]] const FpUnit& fpu() const { return fpu_; }
    [[nodiscard]] const LinkEstimator* link(NodeId lower) const;
    [[nodiscard]] std::size_t pending_bundles() const { return pending_.size(); }
    /// Links from the head's child down to `node`.
    [[nodiscard]] std::vector<NodeId> path_to(NodeId node) const;

private:
    struct Pending {
        NodeId origin;
        std::vector<std::pair<NodeId, std::uint32_t>> hops;  // (lower id, round), top-down
        std::vector<Measurement> bundle;
    };

    LinkEstimator& link_for(NodeId lower);
    bool try_translate(const Pending& p, std::vector<Estimate>& out) const;

    SchemeMode scheme_;
    std::map<NodeId, NodeId> parent_of_;
    FpUnit fpu_{PrecisionMode::Double};
    std::optional<std::uint32_t> last_round_;
    std::map<std::uint32_t, Ticks> t1_by_round_;
    std::map<NodeId, LinkEstimator> links_;
    std::vector<Pending> pending_;
};

}  // namespace tsync
