#include "tsync/precision.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tsync {

std::string_view to_string(PrecisionMode mode) {
    return mode == PrecisionMode::Single ? "single" : "double";
}

double round_single(double x) {
    if (!std::isfinite(x)) {
        throw std::domain_error("round_single: non-finite input");
    }
    // Values beyond FLT_MAX by more than half an ULP would become infinity.
    const auto rounded = static_cast<float>(x);
    if (std::isinf(rounded)) {
        throw std::range_error("round_single: " + std::to_string(x) +
                               " overflows binary32");
    }
    return static_cast<double>(rounded);
}

double fp_op(FpOp op, double a, double b, PrecisionMode mode) {
    if (op == FpOp::Div && b == 0.0) {
        throw std::domain_error("fp_op: division by zero");
    }
    const double lhs = narrow(a, mode);
    const double rhs = narrow(b, mode);
    double result = 0.0;
    if (mode == PrecisionMode::Single) {
        const auto fa = static_cast<float>(lhs);
        const auto fb = static_cast<float>(rhs);
        float fr = 0.0F;
        switch (op) {
            case FpOp::Add: fr = fa + fb; break;
            case FpOp::Sub: fr = fa - fb; break;
            case FpOp::Mul: fr = fa * fb; break;
            case FpOp::Div: fr = fa / fb; break;
        }
        result = static_cast<double>(fr);
    } else {
        switch (op) {
            case FpOp::Add: result = lhs + rhs; break;
            case FpOp::Sub: result = lhs - rhs; break;
            case FpOp::Mul: result = lhs * rhs; break;
            case FpOp::Div: result = lhs / rhs; break;
        }
    }
    if (!std::isfinite(result)) {
        throw std::domain_error("fp_op: non-finite result");
    }
    return result;
}

PrecisionLoss compute_precision_loss(double ratio_full) {
    return PrecisionLoss{ratio_full - round_single(ratio_full)};
}

}  // namespace tsync
