#include "deconv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deconv {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
}

namespace {

// Acklam's rational approximation to the normal quantile, then two Halley
// refinements against erfc to push the error to machine precision.
double quantile_seed(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    }
    double x = quantile_seed(p);
    for (int i = 0; i < 2; ++i) {
        double e = normal_cdf(x) - p;
        double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.18) {
        double s = 0.0;
        for (int k = 1; k <= 100; ++k) {
            double term = std::exp(-2.0 * k * k * x * x);
            s += (k % 2 == 1) ? term : -term;
            if (term < 1e-18) break;
        }
        double p = 2.0 * s;
        return std::clamp(p, 0.0, 1.0);
    }
    // theta transform, accurate for small x where the series above is slow
    double s = 0.0;
    for (int j = 1; j <= 99; j += 2) {
        double term = std::exp(-j * j * M_PI * M_PI / (8.0 * x * x));
        s += term;
        if (term < 1e-18) break;
    }
    double cdf = std::sqrt(2.0 * M_PI) / x * s;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
}

KsResult ks_normal_test(std::span<const double> samples, double mean, double variance) {
    if (samples.size() < 8) {
        throw std::invalid_argument("ks_normal_test: need at least 8 samples");
    }
    if (!(variance > 0.0)) throw std::invalid_argument("ks_normal_test: variance must be > 0");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    double sd = std::sqrt(variance);
    double n = static_cast<double>(v.size());
    double d = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        double z = normal_cdf((v[i] - mean) / sd);
        d = std::max(d, (i + 1) / n - z);
        d = std::max(d, z - i / n);
    }
    return {d, kolmogorov_sf(std::sqrt(n) * d)};
}

namespace {

template <class T, class Add>
T tree_sum(std::span<const T> v, const Add& add, T zero) {
    if (v.empty()) return zero;
    if (v.size() == 1) return v[0];
    size_t half = v.size() / 2;
    return add(tree_sum(v.subspan(0, half), add, zero),
               tree_sum(v.subspan(half), add, zero));
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
    return tree_sum(v, [](double a, double b) { return a + b; }, 0.0);
}

ScaledValue scaled_pairwise_sum(std::span<const ScaledValue> v) {
    return tree_sum(v, [](const ScaledValue& a, const ScaledValue& b) { return scaled_add(a, b); },
                    ScaledValue{0.0, 0.0});
}

MeanVar mean_and_variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("mean_and_variance: need at least 2 values");
    double mean = pairwise_sum(v) / static_cast<double>(v.size());
    std::vector<double> sq(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        double d = v[i] - mean;
        sq[i] = d * d;
    }
    double ss = pairwise_sum(sq);
    return {mean, ss / static_cast<double>(v.size() - 1)};
}

double gamma_fn(double x) {
    if (!(x > 0.0) || x > 35.0) throw std::invalid_argument("gamma_fn: x out of range");
    return std::tgamma(x);
}

}  // namespace deconv
