#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "tsync/messages.hpp"

namespace tsync {

/// Malformed or truncated wire data.
class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Little-endian layouts; see docs/wire_format.md.
std::vector<std::uint8_t> encode(const BeaconRequest& beacon);
std::vector<std::uint8_t> encode(const ReportResponse& report);

MessageType peek_type(std::span<const std::uint8_t> bytes);
BeaconRequest decode_beacon(std::span<const std::uint8_t> bytes);
ReportResponse decode_report(std::span<const std::uint8_t> bytes);

}  // namespace tsync
