#include <stdexcept>
#include <random>

#include "doctest.h"
#include "tsync/wire.hpp"

using namespace tsync;

namespace {

using Bytes = std::vector<std::uint8_t>;

void le(Bytes& out, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

TEST_CASE("beacon golden bytes") {
    const BeaconRequest b{7, Ticks{0x0102030405060708ULL}, 3};
    const Bytes expect{0x01, 0x03, 0x00, 0x07, 0x00, 0x00, 0x00, 0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01};
    CHECK(encode(b) == expect);
    CHECK(decode_beacon(expect) == b);
    CHECK(peek_type(expect) == MessageType::Beacon);
}

TEST_CASE("report golden bytes") {
    ReportResponse r;
    r.origin = 1;
    r.round = 2;
    r.t2 = Ticks{1000};
    r.t3 = Ticks{2000};
    r.anchor = Anchor{0, Ticks{500}};
    r.bundle = {Measurement{9, Ticks{1500}}};
    r.relayed_sync = {SyncRecord{2, 1, 2, Ticks{10}, Ticks{20}, Ticks{30}, Ticks{40}}};
    r.relayed_bundles = {RelayedBundle{2, std::nullopt, {Measurement{4, Ticks{77}}}}};

    Bytes e;
    le(e, 2, 1);      // type
    le(e, 1, 2);      // origin
    le(e, 2, 4);      // round
    le(e, 1000, 8);   // t2
    le(e, 2000, 8);   // t3
    le(e, 1, 1);      // anchor flag
    le(e, 0, 4);      // anchor round
    le(e, 500, 8);    // t2_zero
    le(e, 1, 2);      // bundle count
    le(e, 9, 4);
    le(e, 1500, 8);
    le(e, 1, 2);      // relayed_sync count
    le(e, 2, 4);
    le(e, 1, 2);
    le(e, 2, 2);
    for (std::uint64_t t : {10, 20, 30, 40}) le(e, t, 8);
    le(e, 1, 2);      // relayed_bundles count
    le(e, 2, 2);
    le(e, 0, 1);
    le(e, 1, 2);
    le(e, 4, 4);
    le(e, 77, 8);

    CHECK(encode(r) == e);
    CHECK(decode_report(e) == r);
    CHECK(peek_type(e) == MessageType::Report);
}

TEST_CASE("minimal report is 30 bytes") {
    ReportResponse r;
    CHECK(encode(r).size() == 30);
}

TEST_CASE("randomized report round trip") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 300; ++i) {
        ReportResponse r;
        r.origin = static_cast<NodeId>(rng());
        r.round = static_cast<std::uint32_t>(rng());
        r.t2 = Ticks{rng()};
        r.t3 = Ticks{rng()};
        if (rng() & 1) r.anchor = Anchor{static_cast<std::uint32_t>(rng()), Ticks{rng()}};
        r.bundle.resize(rng() % 8);
        for (auto& m : r.bundle) m = Measurement{static_cast<std::uint32_t>(rng()), Ticks{rng()}};
        r.relayed_sync.resize(rng() % 4);
        for (auto& s : r.relayed_sync) {
            s = SyncRecord{static_cast<std::uint32_t>(rng()), static_cast<NodeId>(rng()), static_cast<NodeId>(rng()),
                           Ticks{rng()}, Ticks{rng()}, Ticks{rng()}, Ticks{rng()}};
        }
        r.relayed_bundles.resize(rng() % 3);
        for (auto& rb : r.relayed_bundles) {
            rb.origin = static_cast<NodeId>(rng());
            rb.bundle.resize(rng() % 6);
            for (auto& m : rb.bundle) m = Measurement{static_cast<std::uint32_t>(rng()), Ticks{rng()}};
        }
        REQUIRE(decode_report(encode(r)) == r);
    }
}

TEST_CASE("malformed input is rejected") {
    const auto good = encode(BeaconRequest{1, Ticks{2}, 0});
    auto truncated = good;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_beacon(truncated), WireError);
    auto trailing = good;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_beacon(trailing), WireError);
    CHECK_THROWS_AS(decode_report(good), WireError);
    CHECK_THROWS_AS(peek_type(Bytes{}), WireError);
    CHECK_THROWS_AS(peek_type(Bytes{9}), WireError);

    auto bad_flag = encode(ReportResponse{});
    bad_flag[23] = 0x80;
    CHECK_THROWS_AS(decode_report(bad_flag), WireError);
}

TEST_CASE("scheme names") {
    CHECK(parse_scheme("ahts") == SchemeMode::Ahts);
    CHECK(parse_scheme("ee-ascfr") == SchemeMode::EeAscfr);
    CHECK(parse_scheme("EE-ASCFR") == SchemeMode::EeAscfr);
    CHECK(to_string(SchemeMode::EeAscfr) == "ee-ascfr");
    CHECK_THROWS_AS(parse_scheme("ftsp"), std::invalid_argument);
}
