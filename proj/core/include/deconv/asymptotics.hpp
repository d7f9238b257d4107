#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deconv/distributions.hpp"
#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"
#include "deconv/scaled.hpp"

namespace deconv {

struct BandwidthSchedule {
    std::function<double(double)> rule;  // n -> h_n
    std::optional<double> interval_width;
    std::string description;
    // even/odd subsequence tag (lattice index k mod 2) where meaningful
    std::function<int(double)> parity;
};

enum class ConditionAVariant { A1, A2, A3, Unclassified };

struct ConditionAClass {
    ConditionAVariant variant = ConditionAVariant::Unclassified;
    double gamma = 0.0;       // A3 only
    std::string side;         // which neighbor gap stabilized: "lower"/"upper"
    struct ProbeRow {
        double n, u, u_minus, u_plus, q_minus, q_plus;
    };
    std::vector<ProbeRow> diagnostics;
};

// Nearest points of the lattice {pi k / width} around u; both equal u when u
// is on the lattice (within relative rounding slack).
std::pair<double, double> lattice_neighbors(double u, double width);

ConditionAClass classify_condition_a(const BandwidthSchedule& sched, double lambda,
                                     const std::vector<double>& probes, double tol);

struct ScheduleTarget {
    ConditionAVariant variant = ConditionAVariant::A1;
    double gamma = 1.0;  // A3 only
};

// Constructs h_n = 1/(2 u_n) with u_n placed relative to the lattice so that
// classify_condition_a recovers the target class. For A3 the offset is solved
// so u^{lambda-1}(u_lattice - u) equals gamma exactly at every n; the schedule
// approaches each lattice point from below.
BandwidthSchedule make_schedule(ScheduleTarget target, double width, double lambda,
                                std::function<double(double)> base,
                                const std::string& base_desc = "");

enum class TheoremId { T1, T2a, T2b, T2c, T3, T4, T5a, T5b, T5c, T6, T7 };

TheoremId theorem_from_string(const std::string& s);
std::string theorem_to_string(TheoremId t);

struct LimitLaw {
    std::function<ScaledValue(double n, double h)> normalizer;
    double limit_mean = 0.0;
    double limit_variance = 0.0;
    TheoremId theorem_id = TheoremId::T1;
    std::string note;
};

struct LimitLawExtras {
    std::optional<double> x;
    std::optional<double> a, b;
    std::optional<double> delta;
    std::optional<double> gamma;          // T2c / T5c
    const TargetModel* target = nullptr;  // T7 variance quadrature
    QuadratureSpec quad;
};

LimitLaw limit_law(TheoremId id, const KernelSpec& k, const NoiseModel& m,
                   const LimitLawExtras& extras);

// Leading-order deterministic coefficient of the normalized cosine sum in the
// interval-estimator decomposition, with vanishing terms dropped:
// (A/pi) [ 2 (mu/lambda)^{1+alpha} Gamma(alpha+1) sin((b-a)/(2h))
//        + (b-a) (mu/lambda)^{2+alpha} Gamma(alpha+2) cos((b-a)/(2h)) h^{lambda-1} ]
double tau_n_eval(const KernelSpec& k, const NoiseModel& m, double a, double b, double h);

// Endpoint expansion of int_eps^1 s^{-lambda0} (1-s)^beta phi_w(s)
// e^{s^lambda/(mu h^lambda)} ds and its exact quadrature counterpart.
ScaledValue laplace_asymptotic(const KernelSpec& k, double eps, double beta, double lambda,
                               double mu, double lambda0, double h);
ScaledValue laplace_exact(const KernelSpec& k, double eps, double beta, double lambda,
                          double mu, double lambda0, double h,
                          const QuadratureSpec& spec = QuadratureSpec{});

}  // namespace deconv
