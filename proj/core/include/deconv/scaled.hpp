#pragma once

#include <cmath>
#include <stdexcept>

namespace deconv {

// Number stored as mantissa * e^log_scale so that factors like e^{1/(2h^2)}
// with h near 0.05 stay representable. Normalized form keeps |mantissa| in
// [1, e), or mantissa == 0 with log_scale == 0.
struct ScaledValue {
    double mantissa = 0.0;
    double log_scale = 0.0;

    static ScaledValue from_double(double v);
    // sign * e^log_magnitude
    static ScaledValue from_log(double log_magnitude, int sign = 1);

    // May overflow to +-inf / underflow to 0 when log_scale is extreme.
    double to_double() const;
    // Natural log of |value|; -inf for zero.
    double log_abs() const;

    bool is_zero() const { return mantissa == 0.0; }
    int sign() const { return (mantissa > 0.0) - (mantissa < 0.0); }
};

ScaledValue scaled_normalize(ScaledValue v);
ScaledValue scaled_add(ScaledValue a, ScaledValue b);
ScaledValue scaled_sub(ScaledValue a, ScaledValue b);
ScaledValue scaled_mul(ScaledValue a, ScaledValue b);
ScaledValue scaled_div(ScaledValue a, ScaledValue b);
ScaledValue scaled_negate(ScaledValue a);
ScaledValue scaled_abs(ScaledValue a);

// value * e^shift, exact in the exponent
ScaledValue scaled_shift(ScaledValue a, double shift);

// a/b as a plain double; requires the ratio to be representable
double scaled_ratio(ScaledValue a, ScaledValue b);

// -1, 0, +1 comparing |a| vs |b|
int scaled_compare_abs(const ScaledValue& a, const ScaledValue& b);

}  // namespace deconv
