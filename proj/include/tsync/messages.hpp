#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tsync/clock.hpp"

namespace tsync {

using NodeId = std::uint16_t;
inline constexpr NodeId kHeadId = 0;

/// Where estimation runs. EeAscfr: sensors estimate the ratio and run a
/// binary32 logical clock. Ahts: sensors only timestamp; the head estimates
/// everything in double precision.
enum class SchemeMode { EeAscfr, Ahts };

std::string_view to_string(SchemeMode scheme);
/// Accepts "ahts" and "ee-ascfr"/"ee_ascfr"/"eeascfr". Throws std::invalid_argument.
SchemeMode parse_scheme(std::string_view text);

struct BeaconRequest {
    std::uint32_t round = 0;
    Ticks t1{};
    NodeId origin = kHeadId;  // sending (upper) node

    bool operator==(const BeaconRequest&) const = default;
};

/// Public part of a measurement. Ground truth lives only in the simulator.
struct Measurement {
    std::uint32_t seq = 0;
    Ticks t_m{};

    bool operator==(const Measurement&) const = default;
};

/// Four timestamps of one reverse two-way exchange on the link upper -> lower.
/// t1/t4 are on the upper node's clock, t2/t3 on the lower node's.
struct SyncRecord {
    std::uint32_t round = 0;
    NodeId upper = 0;
    NodeId lower = 0;
    Ticks t1{};
    Ticks t2{};
    Ticks t3{};
    Ticks t4{};

    bool operator==(const SyncRecord&) const = default;
};

/// First-round reception time of a node, delivered until acknowledged.
struct Anchor {
    std::uint32_t round = 0;
    Ticks t2_zero{};

    bool operator==(const Anchor&) const = default;
};

/// A lower node's bundle carried through a gateway untouched.
struct RelayedBundle {
    NodeId origin = 0;
    std::optional<Anchor> anchor;
    std::vector<Measurement> bundle;

    bool operator==(const RelayedBundle&) const = default;
};

struct ReportResponse {
    NodeId origin = 0;
    std::uint32_t round = 0;  // round of t2
    Ticks t2{};
    Ticks t3{};
    std::optional<Anchor> anchor;
    std::vector<Measurement> bundle;
    std::vector<SyncRecord> relayed_sync;
    std::vector<RelayedBundle> relayed_bundles;

    bool operator==(const ReportResponse&) const = default;
};

enum class MessageType : std::uint8_t { Beacon = 0x01, Report = 0x02 };

}  // namespace tsync
