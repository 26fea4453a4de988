#include <stdexcept>
#include <cmath>
#include <random>

#include "doctest.h"
#include "tsync/simnet.hpp"

using namespace tsync;

namespace {

ScenarioConfig quiet(SchemeMode scheme = SchemeMode::Ahts) {
    ScenarioConfig c;
    c.scheme = scheme;
    c.delay.propagation = 5e-4;
    c.delay.interrupt_tx = DelayDist::constant(0.0);
    c.delay.interrupt_rx = DelayDist::constant(0.0);
    return c;
}

}  // namespace

TEST_CASE("sample_delay support") {
    std::mt19937_64 rng(1);
    DelayModel constant;
    constant.propagation = 5e-4;
    constant.interrupt_tx = DelayDist::constant(0.0);
    constant.interrupt_rx = DelayDist::constant(0.0);
    for (int i = 0; i < 100; ++i) CHECK(sample_delay(constant, rng) == 5e-4);

    DelayModel uni = constant;
    uni.interrupt_tx = DelayDist::uniform(0.0, 10e-6);
    uni.interrupt_rx = DelayDist::uniform(0.0, 10e-6);
    for (int i = 0; i < 10000; ++i) {
        const double d = sample_delay(uni, rng);
        REQUIRE(d >= 5e-4);
        REQUIRE(d <= 5e-4 + 20e-6);
    }
}

TEST_CASE("truncated gaussian never goes negative") {
    std::mt19937_64 rng(2);
    const auto g = DelayDist::gaussian(1e-6, 2e-6);
    std::size_t negatives = 0;
    for (int i = 0; i < 1'000'000; ++i) negatives += g.sample(rng) < 0.0;
    CHECK(negatives == 0);
}

TEST_CASE("config validation names the constraint") {
    auto expect = [](ScenarioConfig c, const char* needle) {
        try {
            c.validate();
            FAIL("accepted invalid config, expected: " << needle);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    ScenarioConfig c;
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.si_seconds = 0;
    expect(bad, "si_seconds");
    bad = c;
    bad.duration_seconds = 9.0;
    expect(bad, "duration_seconds");
    bad = c;
    bad.bundle_size = 0;
    expect(bad, "bundle_size");
    bad = c;
    bad.measurements_per_si = 6;
    expect(bad, "measurements_per_si");
    bad = c;
    bad.hops = 0;
    expect(bad, "hops");
    bad = c;
    bad.trim_fraction = 1.0;
    expect(bad, "trim_fraction");
    bad = c;
    bad.loss_probability = -0.1;
    expect(bad, "loss_probability");
    bad = c;
    bad.delay.interrupt_tx = DelayDist::uniform(2e-6, 1e-6);
    expect(bad, "interrupt_tx");
    bad = c;
    bad.processing_seconds = 0.5;
    expect(bad, "processing_seconds");
    bad = c;
    bad.sensor_clocks.resize(2);
    expect(bad, "sensor_clocks");
}

TEST_CASE("invalid config is reported before any event") {
    ScenarioConfig c;
    c.si_seconds = -1;
    CHECK_THROWS_AS(run(c), ConfigError);
}

TEST_CASE("default run: rounds, measurements and messages") {
    ScenarioConfig c;
    const auto r = run(c);
    CHECK(r.rounds == 3600);
    CHECK(r.samples.size() == 18'000);
    CHECK(r.undelivered == 0);
    CHECK(r.count(MessageType::Beacon) == 3600);
    CHECK(r.count(MessageType::Report) == 3600);
    REQUIRE(r.sensors.size() == 1);
    CHECK(r.sensors[0].measurements == 18'000);
    CHECK(r.sensors[0].fp_ops == 0);
    CHECK(r.head_fp_ops > 0);
    for (const auto& m : r.messages) REQUIRE(m.recv_time > m.send_time);
    std::size_t carried = 0;
    for (const auto& m : r.messages) carried += m.measurements;
    CHECK(carried == 18'000);
}

TEST_CASE("zero-noise single hop is quantization-exact") {
    for (double skew : {-100e-6, -37e-6, 0.0, 12e-6, 100e-6}) {
        auto c = quiet();
        c.sensor_clocks = {ClockParams{skew, 0.61, 0.0, 1.0, 0}};
        const auto r = run(c);
        double worst = 0.0;
        for (const auto& s : r.samples) worst = std::max(worst, std::fabs(s.error));
        CHECK(worst <= 2e-6);
    }
}

TEST_CASE("degenerate channel with identical clocks is exact") {
    auto c = quiet();
    c.delay.propagation = 0.0;
    c.duration_seconds = 100.0;
    c.measurements_per_si = 4;
    c.sensor_clocks = {ClockParams{}};
    const auto r = run(c);
    REQUIRE(r.samples.size() == 400);
    // only the one-tick floor of the turnaround stamps remains
    for (const auto& s : r.samples) CHECK(std::fabs(s.error) <= 1e-6);
}

TEST_CASE("runs are bit-identical for a seed and differ across seeds") {
    ScenarioConfig c;
    c.hops = 2;
    c.duration_seconds = 300;
    c.drift_rate_ppm_per_sqrt_s = 0.01;
    const auto a = run(c);
    const auto b = run(c);
    REQUIRE(a.samples.size() == b.samples.size());
    bool same = true;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        same = same && a.samples[i].error == b.samples[i].error && a.samples[i].seq == b.samples[i].seq &&
               a.samples[i].node == b.samples[i].node;
    }
    CHECK(same);
    c.rng_seed = 2;
    const auto d = run(c);
    CHECK(d.samples[100].error != a.samples[100].error);
}

TEST_CASE("multi-hop message accounting and translation") {
    for (unsigned n : {1u, 2u, 3u}) {
        ScenarioConfig c;
        c.hops = n;
        c.duration_seconds = 100;
        const auto r = run(c);
        CHECK(r.count(MessageType::Beacon) == 100 * n);
        CHECK(r.count(MessageType::Report) == 100 * n);
        CHECK(r.samples.size() == 500 * n);
        CHECK(r.undelivered == 0);
        for (const auto& s : r.sensors) CHECK(s.fp_ops == 0);
        for (const auto& s : r.samples) REQUIRE(std::fabs(s.error) < 50e-6);
    }
}

TEST_CASE("zero measurements still synchronizes every round") {
    ScenarioConfig c;
    c.measurements_per_si = 0;
    c.hops = 2;
    c.duration_seconds = 50;
    const auto r = run(c);
    CHECK(r.samples.empty());
    CHECK(r.count(MessageType::Report) == 100);
}

TEST_CASE("EE-ASCFR sensors do the arithmetic") {
    ScenarioConfig c;
    c.scheme = SchemeMode::EeAscfr;
    c.duration_seconds = 200;
    const auto r = run(c);
    CHECK(r.samples.size() == 1000);
    CHECK(r.sensors[0].fp_ops > 0);
    CHECK(r.sensors[0].ratio_sensor_final == round_single(r.sensors[0].ratio_sensor_final));
}

TEST_CASE("message loss degrades gracefully") {
    ScenarioConfig c;
    c.duration_seconds = 300;
    c.hops = 2;
    c.loss_probability = 0.05;
    const auto r = run(c);
    std::size_t lost = 0;
    for (const auto& m : r.messages) lost += m.lost;
    CHECK(lost > 0);
    CHECK(r.samples.size() + r.undelivered == 3000);
    CHECK(r.samples.size() > 2000);
}
