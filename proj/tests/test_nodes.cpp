#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "tsync/nodes.hpp"
#include "tsync/wire.hpp"

using namespace tsync;

namespace {

SensorSettings leaf(SchemeMode scheme, unsigned m = 2, std::size_t b = 5) {
    SensorSettings s;
    s.id = 1;
    s.upper = kHeadId;
    s.scheme = scheme;
    s.measurements_per_round = m;
    s.bundle_size = b;
    return s;
}

}  // namespace

TEST_CASE("head beacons") {
    HeadNode head(SchemeMode::Ahts, {{1, 0}});
    const auto b0 = head.emit_beacon(0, Ticks{0});
    CHECK(b0 == BeaconRequest{0, Ticks{0}, kHeadId});
    CHECK(head.emit_beacon(1, Ticks{1'000'000}).t1.value == 1'000'000);
    CHECK_THROWS_AS(head.emit_beacon(3, Ticks{3'000'000}), ProtocolError);
}

TEST_CASE("sensor anchors, stages and reports") {
    SensorNode s(leaf(SchemeMode::Ahts));
    CHECK_THROWS_AS(s.emit_report(Ticks{1}), ProtocolError);
    CHECK(s.on_beacon(BeaconRequest{0, Ticks{0}, 0}, Ticks{500'123}));
    REQUIRE(s.raw_anchor_pair());
    CHECK(s.raw_anchor_pair()->t1.value == 0);
    CHECK(s.raw_anchor_pair()->t2.value == 500'123);
    CHECK_FALSE(s.on_beacon(BeaconRequest{0, Ticks{0}, 0}, Ticks{500'999}));  // duplicate dropped
    CHECK(s.raw_anchor_pair()->t2.value == 500'123);
    CHECK_THROWS_AS(s.on_beacon(BeaconRequest{1, Ticks{0}, 4}, Ticks{1}), ProtocolError);

    CHECK(s.response_outstanding());
    CHECK_FALSE(s.report_due());
    s.record_measurement(Ticks{600'000});
    CHECK_FALSE(s.report_due());
    s.record_measurement(Ticks{700'000});
    CHECK(s.report_due());

    const auto r0 = s.emit_report(Ticks{701'000});
    CHECK(r0.round == 0);
    CHECK(r0.t2.value == 500'123);
    CHECK(r0.t3.value == 701'000);
    REQUIRE(r0.anchor);
    CHECK(r0.anchor->t2_zero.value == 500'123);
    REQUIRE(r0.bundle.size() == 2);
    CHECK(r0.bundle[0].t_m.value == 600'000);  // raw ticks untouched in AHTS
    CHECK(r0.bundle[1].seq == 1);
    CHECK_FALSE(s.response_outstanding());
    CHECK(s.fpu().ops() == 0);

    // anchor repeats until a beacon of a later round than the first report
    s.on_beacon(BeaconRequest{1, Ticks{1'000'000}, 0}, Ticks{1'500'150});
    s.record_measurement(Ticks{1'600'000});
    s.record_measurement(Ticks{1'700'000});
    const auto r1 = s.emit_report(Ticks{1'701'000});
    CHECK_FALSE(r1.anchor);
    CHECK(s.fpu().ops() == 0);
}

TEST_CASE("bundle size caps each report") {
    SensorNode s(leaf(SchemeMode::Ahts, 5, 5));
    s.on_beacon(BeaconRequest{0, Ticks{0}, 0}, Ticks{10});
    for (int i = 0; i < 7; ++i) s.record_measurement(Ticks{100u + i});
    CHECK(s.emit_report(Ticks{200}).bundle.size() == 5);
    s.on_beacon(BeaconRequest{1, Ticks{1000}, 0}, Ticks{1010});
    CHECK(s.emit_report(Ticks{1100}).bundle.size() == 2);
}

TEST_CASE("EE-ASCFR sensor updates its ratio in single precision") {
    SensorNode s(leaf(SchemeMode::EeAscfr));
    s.on_beacon(BeaconRequest{0, Ticks{0}, 0}, Ticks{1000});
    CHECK(s.ratio_est() == 1.0);
    s.on_beacon(BeaconRequest{1, Ticks{10'000'000}, 0}, Ticks{10'001'500});
    const double expect = cr_ratio(Ticks{0}, Ticks{1000}, Ticks{10'000'000}, Ticks{10'001'500}, PrecisionMode::Single);
    CHECK(s.ratio_est() == expect);
    CHECK(s.ratio_est() == fp_op(FpOp::Div, 10'000'500.0, 10'000'000.0, PrecisionMode::Single));
    CHECK(s.fpu().ops() > 0);
    // measurement stamped on the logical clock
    const auto m = s.record_measurement(Ticks{20'002'000});
    const double logical = 1000.0 + (20'002'000.0 - 1000.0) / expect;
    CHECK(m.t_m.value == static_cast<std::uint64_t>(std::floor(logical)));
}

TEST_CASE("gateway forwards bundles untouched") {
    ReportResponse child;
    child.origin = 2;
    child.round = 4;
    child.bundle = {Measurement{0, Ticks{11}}, Measurement{1, Ticks{12}}};
    child.anchor = Anchor{0, Ticks{3}};
    ReportResponse own;
    own.origin = 1;
    const SyncRecord link{4, 1, 2, Ticks{1}, Ticks{2}, Ticks{3}, Ticks{4}};
    const auto out = gateway_forward(child, link, own);
    REQUIRE(out.relayed_sync.size() == 1);
    CHECK(out.relayed_sync[0] == link);
    REQUIRE(out.relayed_bundles.size() == 1);
    CHECK(out.relayed_bundles[0].origin == 2);
    CHECK(out.relayed_bundles[0].anchor == child.anchor);
    CHECK(out.relayed_bundles[0].bundle == child.bundle);

    ReportResponse tmp;
    tmp.bundle = child.bundle;
    ReportResponse tmp2;
    tmp2.bundle = out.relayed_bundles[0].bundle;
    CHECK(encode(tmp) == encode(tmp2));
}

TEST_CASE("gateway waits for its child's report") {
    SensorSettings g = leaf(SchemeMode::Ahts, 1);
    g.child = 2;
    SensorNode gw(g);
    gw.on_beacon(BeaconRequest{0, Ticks{0}, 0}, Ticks{100});
    const auto cb = gw.make_child_beacon(0, Ticks{200});
    CHECK(cb.origin == 1);
    CHECK(cb.t1.value == 200);
    gw.record_measurement(Ticks{300});
    CHECK_FALSE(gw.report_due());
    ReportResponse child;
    child.origin = 2;
    child.round = 0;
    child.t2 = Ticks{50};
    child.t3 = Ticks{60};
    gw.on_child_report(child, Ticks{400});
    CHECK(gw.report_due());
    const auto out = gw.emit_report(Ticks{500});
    REQUIRE(out.relayed_sync.size() == 1);
    CHECK(out.relayed_sync[0] == SyncRecord{0, 1, 2, Ticks{200}, Ticks{50}, Ticks{60}, Ticks{400}});

    child.origin = 3;
    CHECK_THROWS_AS(gw.on_child_report(child, Ticks{600}), ProtocolError);
    child.origin = 2;
    child.round = 9;
    CHECK_THROWS_AS(gw.on_child_report(child, Ticks{600}), ProtocolError);
}

TEST_CASE("head rejects unknown origins and missing anchors") {
    HeadNode head(SchemeMode::Ahts, {{1, 0}, {2, 1}});
    head.emit_beacon(0, Ticks{0});
    ReportResponse r;
    r.origin = 2;
    CHECK_THROWS_AS(head.on_report(r, Ticks{10}), ProtocolError);
    r.origin = 7;
    CHECK_THROWS_AS(head.on_report(r, Ticks{10}), ProtocolError);
    r.origin = 1;
    r.t2 = Ticks{5};
    r.t3 = Ticks{6};
    CHECK_THROWS_AS(head.on_report(r, Ticks{10}), ProtocolError);  // first report without t2_zero
    CHECK(head.path_to(2) == std::vector<NodeId>{1, 2});
}

TEST_CASE("single hop exchange with a degenerate channel is exact") {
    // Sensor clock equals the head clock and delivery is instantaneous.
    HeadNode head(SchemeMode::Ahts, {{1, 0}});
    SensorNode s(leaf(SchemeMode::Ahts, 1));
    std::vector<Estimate> out;
    for (std::uint32_t k = 0; k < 3; ++k) {
        const Ticks t{k * 1'000'000ULL};
        auto b = head.emit_beacon(k, t);
        s.on_beacon(b, t);
        s.record_measurement(Ticks{t.value + 500'000});
        const Ticks tx{t.value + 600'000};
        const auto est = head.on_report(s.emit_report(tx), tx);
        out.insert(out.end(), est.begin(), est.end());
    }
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].estimate.seconds == doctest::Approx(i + 0.5).epsilon(1e-15));
    }
    CHECK(head.pending_bundles() == 0);
    CHECK(head.fpu().ops() > 0);
}
