#include "deconv/scaled.hpp"

#include <limits>
#include <utility>

namespace deconv {

ScaledValue scaled_normalize(ScaledValue v) {
    if (!std::isfinite(v.mantissa) || !std::isfinite(v.log_scale)) {
        throw std::invalid_argument("scaled_normalize: non-finite component");
    }
    if (v.mantissa == 0.0) return {0.0, 0.0};
    double am = std::fabs(v.mantissa);
    double k = std::floor(std::log(am));
    if (k != 0.0) {
        v.mantissa = v.mantissa * std::exp(-k);
        v.log_scale += k;
    }
    // log/exp rounding can leave the mantissa just outside [1, e)
    am = std::fabs(v.mantissa);
    if (am < 1.0) {
        v.mantissa *= std::exp(1.0);
        v.log_scale -= 1.0;
    } else if (am >= std::exp(1.0)) {
        v.mantissa *= std::exp(-1.0);
        v.log_scale += 1.0;
    }
    return v;
}

ScaledValue ScaledValue::from_double(double v) {
    return scaled_normalize({v, 0.0});
}

ScaledValue ScaledValue::from_log(double log_magnitude, int sign) {
    if (sign == 0) return {0.0, 0.0};
    double k = std::floor(log_magnitude);
    double m = std::exp(log_magnitude - k);
    return scaled_normalize({sign > 0 ? m : -m, k});
}

double ScaledValue::to_double() const {
    if (mantissa == 0.0) return 0.0;
    return mantissa * std::exp(log_scale);
}

double ScaledValue::log_abs() const {
    if (mantissa == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::fabs(mantissa)) + log_scale;
}

ScaledValue scaled_add(ScaledValue a, ScaledValue b) {
    if (a.mantissa == 0.0) return scaled_normalize(b);
    if (b.mantissa == 0.0) return scaled_normalize(a);
    // factor out the larger exponent so nothing overflows
    if (a.log_scale < b.log_scale) std::swap(a, b);
    double m = a.mantissa + b.mantissa * std::exp(b.log_scale - a.log_scale);
    return scaled_normalize({m, a.log_scale});
}

ScaledValue scaled_sub(ScaledValue a, ScaledValue b) {
    return scaled_add(a, scaled_negate(b));
}

ScaledValue scaled_mul(ScaledValue a, ScaledValue b) {
    if (a.mantissa == 0.0 || b.mantissa == 0.0) return {0.0, 0.0};
    return scaled_normalize({a.mantissa * b.mantissa, a.log_scale + b.log_scale});
}

ScaledValue scaled_div(ScaledValue a, ScaledValue b) {
    if (b.mantissa == 0.0) throw std::invalid_argument("scaled_div: division by zero");
    if (a.mantissa == 0.0) return {0.0, 0.0};
    return scaled_normalize({a.mantissa / b.mantissa, a.log_scale - b.log_scale});
}

ScaledValue scaled_negate(ScaledValue a) {
    a.mantissa = -a.mantissa;
    return a;
}

ScaledValue scaled_abs(ScaledValue a) {
    a.mantissa = std::fabs(a.mantissa);
    return a;
}

ScaledValue scaled_shift(ScaledValue a, double shift) {
    if (a.mantissa == 0.0) return a;
    a.log_scale += shift;
    return a;
}

double scaled_ratio(ScaledValue a, ScaledValue b) {
    if (b.mantissa == 0.0) throw std::invalid_argument("scaled_ratio: division by zero");
    if (a.mantissa == 0.0) return 0.0;
    return (a.mantissa / b.mantissa) * std::exp(a.log_scale - b.log_scale);
}

int scaled_compare_abs(const ScaledValue& a, const ScaledValue& b) {
    bool az = a.mantissa == 0.0, bz = b.mantissa == 0.0;
    if (az && bz) return 0;
    if (az) return -1;
    if (bz) return 1;
    double la = a.log_abs(), lb = b.log_abs();
    if (la < lb) return -1;
    if (la > lb) return 1;
    return 0;
}

}  // namespace deconv
