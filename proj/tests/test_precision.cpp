#include <cmath>
#include <cstring>
#include <limits>
#include <algorithm>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "tsync/precision.hpp"

using namespace tsync;

TEST_CASE("round_single reference values") {
    CHECK(round_single(1.0) == 1.0);
    CHECK(round_single(0.1) == static_cast<double>(0.1f));
    CHECK(round_single(0.1) == doctest::Approx(0.100000001490116).epsilon(1e-15));

    const double x = 1.0000001;
    const double r = round_single(x);
    CHECK(std::fabs(r - x) <= std::ldexp(1.0, -24));
    // nearest of the two binary32 neighbours around x
    const float lo = std::nextafter(1.0f, 2.0f);
    CHECK((r == 1.0 || r == static_cast<double>(lo)));
    CHECK(std::fabs(r - x) <= std::fabs((r == 1.0 ? static_cast<double>(lo) : 1.0) - x));
}

TEST_CASE("round_single ties to even") {
    const double tie = 1.0 + std::ldexp(1.0, -24);  // halfway between 1 and 1 + 2^-23
    CHECK(round_single(tie) == 1.0);
    const double tie_up = 1.0 + 3 * std::ldexp(1.0, -24);
    CHECK(round_single(tie_up) == 1.0 + std::ldexp(1.0, -22));
}

TEST_CASE("round_single rejects out-of-domain input") {
    CHECK_THROWS_AS(round_single(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(round_single(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(round_single(1e39), std::range_error);
}

TEST_CASE("round_single is idempotent and monotone") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    double prev_x = -2e6;
    double prev_r = round_single(prev_x);
    std::vector<double> xs(20000);
    for (auto& v : xs) v = u(rng);
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
        const double r = round_single(x);
        CHECK(round_single(r) == r);
        CHECK(r >= prev_r);
        prev_x = x;
        prev_r = r;
    }
}

TEST_CASE("fp_op examples") {
    CHECK(fp_op(FpOp::Div, 10.0, 1.0, PrecisionMode::Single) == 10.0);
    const double s = fp_op(FpOp::Div, 1e7, 1.0000001, PrecisionMode::Single);
    const double d = 1e7 / 1.0000001;
    CHECK(std::fabs(s - d) <= 1e7 * std::ldexp(1.0, -23));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e9, 1e9);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        CHECK(fp_op(FpOp::Add, a, b, PrecisionMode::Double) == a + b);
        CHECK(fp_op(FpOp::Sub, a, b, PrecisionMode::Double) == a - b);
        CHECK(fp_op(FpOp::Mul, a, b, PrecisionMode::Double) == a * b);
        CHECK(fp_op(FpOp::Div, a, b, PrecisionMode::Double) == a / b);
        const float fa = static_cast<float>(a);
        const float fb = static_cast<float>(b);
        CHECK(fp_op(FpOp::Mul, a, b, PrecisionMode::Single) == static_cast<double>(fa * fb));
    }
}

TEST_CASE("fp_op errors") {
    CHECK_THROWS_AS(fp_op(FpOp::Div, 1.0, 0.0, PrecisionMode::Double), std::domain_error);
    CHECK_THROWS_AS(fp_op(FpOp::Div, 1.0, 0.0, PrecisionMode::Single), std::domain_error);
    CHECK_THROWS(fp_op(FpOp::Mul, 1e300, 1e300, PrecisionMode::Double));
    CHECK_THROWS(fp_op(FpOp::Mul, 1e30, 1e30, PrecisionMode::Single));
}

TEST_CASE("compute_precision_loss") {
    CHECK(compute_precision_loss(1.0).epsilon == 0.0);
    CHECK(compute_precision_loss(1.0 + std::ldexp(1.0, -25)).epsilon == std::ldexp(1.0, -25));

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(1.0 - 1e-4, 1.0 + 1e-4);
    for (int i = 0; i < 100000; ++i) {
        const double r = u(rng);
        const double e = compute_precision_loss(r).epsilon;
        CHECK(std::fabs(e) <= std::ldexp(1.0, -24) * r);
        CHECK(std::fabs(e) <= 6e-8);
    }
}

TEST_CASE("FpUnit counts evaluations and passes its mode") {
    FpUnit single(PrecisionMode::Single);
    CHECK(single.ops() == 0);
    const double v = single.eval([](PrecisionMode m) { return narrow(0.1, m); });
    CHECK(v == static_cast<double>(0.1f));
    CHECK(single.ops() == 1);
    FpUnit dbl;
    CHECK(dbl.eval([](PrecisionMode m) { return narrow(0.1, m); }) == 0.1);
}
