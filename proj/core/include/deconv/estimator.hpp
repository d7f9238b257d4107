#pragma once

#include <optional>
#include <vector>

#include "deconv/distributions.hpp"
#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"
#include "deconv/scaled.hpp"

namespace deconv {

struct Sample {
    std::vector<double> x;
    std::size_t n() const { return x.size(); }
};

enum class Representation {
    cosine_sum,      // one integral per observation
    direct_fourier,  // empirical characteristic function inside one integral
};

struct EstimateResult {
    ScaledValue value;
    Representation representation_used = Representation::cosine_sum;
    double quadrature_error = 0.0;
    // the lower endpoint actually used (CDF estimation only)
    std::optional<double> a_used;
};

// f_nh(x) = (1/(pi n h)) sum_j int_0^1 cos(s(X_j - x)/h) phi_w(s)/phi_k(s/h) ds
EstimateResult estimate_density(const Sample& s, const KernelSpec& k, const NoiseModel& m,
                                double h, double x, const QuadratureSpec& spec,
                                Representation rep = Representation::cosine_sum);

// F_nh(a,b) = (2/(pi n)) sum_j int_0^1 (1/s) cos(s(X_j - mid)/h) sin(s(b-a)/(2h))
//             phi_w(s)/phi_k(s/h) ds, mid = (a+b)/2
EstimateResult estimate_interval(const Sample& s, const KernelSpec& k, const NoiseModel& m,
                                 double h, double a, double b, const QuadratureSpec& spec,
                                 Representation rep = Representation::cosine_sum);

struct CdfLowerRule {
    std::optional<double> explicit_a;
    double delta = 0.5;  // used when explicit_a is unset
};

// CDF estimate at b: F_nh(a, b) with a = -min(h^-lambda, e^{(1-delta)/(2 mu h^lambda)})
// unless given explicitly. Both divergence conditions on a hold along h -> 0.
EstimateResult estimate_cdf(const Sample& s, const KernelSpec& k, const NoiseModel& m,
                            double h, double b, const CdfLowerRule& rule,
                            const QuadratureSpec& spec);

double cdf_rule_a(const NoiseModel& m, double h, double delta);

// Cauchy(1) noise + indicator kernel closed form of f_nh(x)
double cauchy_closed_form(const Sample& s, double h, double x);

// Exact E f_nh(x) = (1/(pi h)) int_0^1 Re[e^{-i s x / h} phi_f(s/h)] phi_w(s) ds.
// The noise characteristic function cancels, so no NoiseModel argument.
double expected_density(const TargetModel& f, const KernelSpec& k, double h, double x,
                        const QuadratureSpec& spec);
double expected_interval(const TargetModel& f, const KernelSpec& k, double h, double a,
                         double b, const QuadratureSpec& spec);

struct CenteredStats {
    double u_nh;  // n^{-1/2} sum (cos((X_j - c)/h) - e_cos)
    double v_nh;  // sine analogue
    double s_nh;  // same as u_nh when c is the interval midpoint
};

CenteredStats centered_stats(const Sample& s, double h, double center, double e_cos,
                             double e_sin);

// Var of T_1 = (1/(pi h)) int_0^1 cos(s(X_1 - x)/h) phi_w(s)/phi_k(s/h) ds,
// by outer quadrature of g(x_1) times the squared inner integral.
// n * Var(f_nh(x)) equals this exactly.
ScaledValue exact_term_variance(const TargetModel& f, const NoiseModel& m, const KernelSpec& k,
                                double h, double x, const QuadratureSpec& spec);

// Interval analogue: Var of (2/pi) J(X_1) where J is the per-observation
// integral of estimate_interval; n * Var(F_nh(a,b)) equals this exactly.
ScaledValue exact_interval_term_variance(const TargetModel& f, const NoiseModel& m,
                                         const KernelSpec& k, double h, double a, double b,
                                         const QuadratureSpec& spec);

// Shared inner integrals (exposed for the Monte Carlo fast path):
// density: I(d) = int_0^1 cos(s d) phi_w(s) / phi_k(s/h) ds, d = (X - x)/h
// interval: J(d) = int_0^1 cos(s d) sin(s B)/s phi_w(s) / phi_k(s/h) ds,
//           d = (X - mid)/h, B = (b - a)/(2h)
ScaledValue density_inner_integral(const KernelSpec& k, const NoiseModel& m, double h,
                                   double d, const QuadratureSpec& spec,
                                   double* err_out = nullptr);
ScaledValue interval_inner_integral(const KernelSpec& k, const NoiseModel& m, double h,
                                    double B, double d, const QuadratureSpec& spec,
                                    double* err_out = nullptr);

}  // namespace deconv
