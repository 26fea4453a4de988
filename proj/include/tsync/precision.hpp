#pragma once

#include <cstdint>
#include <string_view>

namespace tsync {

/// Arithmetic width a node evaluates its synchronization math in. Single
/// reproduces a sensor MCU restricted to IEEE 754 binary32; Double is the
/// native width and is the identity on every value.
enum class PrecisionMode { Single, Double };

std::string_view to_string(PrecisionMode mode);

enum class FpOp { Add, Sub, Mul, Div };

/// Nearest binary32 value (ties to even), widened back to double.
/// Throws std::domain_error for non-finite input and std::range_error when
/// the value lies outside the binary32 range.
double round_single(double x);

/// Evaluates `a op b`. In Single mode both operands and the result are
/// constrained to binary32, as on hardware with a correctly rounded FPU.
/// Throws std::domain_error on division by zero or a non-finite result.
double fp_op(FpOp op, double a, double b, PrecisionMode mode);

/// Rounds `x` to the storage width of `mode`.
inline double narrow(double x, PrecisionMode mode) {
    return mode == PrecisionMode::Single ? round_single(x) : x;
}

/// Loss incurred when a full-precision value is stored in binary32.
struct PrecisionLoss {
    double epsilon = 0.0;
};

/// epsilon = ratio - round_single(ratio), i.e. the skew estimate minus its
/// limited-precision counterpart.
PrecisionLoss compute_precision_loss(double ratio_full);

/// Floating-point unit of one simulated node. Every synchronization computation
/// a node performs is routed through eval() so that tests can assert which
/// nodes did arithmetic at all.
class FpUnit {
public:
    explicit FpUnit(PrecisionMode mode = PrecisionMode::Double) : mode_(mode) {}

    [[nodiscard]] PrecisionMode mode() const { return mode_; }
    [[nodiscard]] std::uint64_t ops() const { return ops_; }

    template <class F>
    decltype(auto) eval(F&& f) {
        ++ops_;
        return f(mode_);
    }

private:
    PrecisionMode mode_;
    std::uint64_t ops_ = 0;
};

}  // namespace tsync
