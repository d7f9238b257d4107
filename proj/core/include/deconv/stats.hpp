#pragma once

#include <span>
#include <vector>

#include "deconv/scaled.hpp"

namespace deconv {

double normal_cdf(double z);       // standard normal CDF
double normal_quantile(double p);  // inverse CDF, p in (0,1)

// Survival function of the asymptotic Kolmogorov distribution,
// P(sup_t |B(t)| > x) for a Brownian bridge. Uses the alternating series for
// large x and the theta-transformed series for small x.
double kolmogorov_sf(double x);

struct KsResult {
    double statistic;
    double p_value;
};

// Two-sided KS test of the samples against N(mean, variance).
KsResult ks_normal_test(std::span<const double> samples, double mean, double variance);

// Deterministic tree summation, independent of how callers might split work.
double pairwise_sum(std::span<const double> v);
ScaledValue scaled_pairwise_sum(std::span<const ScaledValue> v);

struct MeanVar {
    double mean;
    double variance;  // unbiased (divides by count-1)
};
MeanVar mean_and_variance(std::span<const double> v);

// Gamma function on (0, 35); relative error well under 1e-10 there.
double gamma_fn(double x);

}  // namespace deconv
