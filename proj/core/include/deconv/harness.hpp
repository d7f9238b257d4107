#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deconv/asymptotics.hpp"
#include "deconv/config.hpp"
#include "deconv/distributions.hpp"
#include "deconv/estimator.hpp"
#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"

namespace deconv {

// What the replication loop actually computes.
enum class StatisticKind {
    density,        // pointwise estimate, normalized and centered
    interval,       // interval-probability estimate
    cdf,            // distribution function estimate (rule-based lower cutoff)
    cosine,         // centered cosine sum, already on the n^{-1/2} scale
    cauchy_closed,  // pointwise estimate through the unit-Cauchy closed form
};

struct ExperimentConfig {
    TargetModel target = TargetModel::normal(0.0, 1.0);
    NoiseModel noise = NoiseModel::normal(1.0);
    KernelSpec kernel = builtin_kernel("indicator");
    // empty = plain cosine statistic ("U")
    std::optional<TheoremId> law;
    std::size_t n = 1000;
    std::size_t replications = 100;
    std::uint64_t seed = 1;
    double h = 0.25;
    std::optional<double> x;
    std::optional<double> a, b;
    double delta = 0.5;
    std::optional<double> gamma;
    int threads = 1;
    double profile_step = 0.01;
    QuadratureSpec quad;
    std::string schedule_note;  // filled when h came from a schedule
    ConfigMap raw;              // source key-value view, kept for hashing and reports

    // Builds a config from flat keys; unknown keys are rejected. When the
    // bandwidth comes from schedule/schedule_base/schedule_index instead of
    // an explicit h, the lattice placement is resolved here.
    static ExperimentConfig from_map(const ConfigMap& m);

    StatisticKind kind() const;
    std::string statistic_name() const;
};

struct MonteCarloReport {
    std::string statistic;
    std::uint64_t config_hash = 0;
    std::map<std::string, std::string> config_entries;
    std::size_t n = 0;
    std::size_t replications = 0;
    double h = 0.0;
    std::uint64_t seed = 0;

    // centering and scale of the reference normal used by the test:
    // mean 0 (statistics are centered at their exact finite-sample mean)
    // and the finite-bandwidth oracle variance
    double predicted_mean = 0.0;
    double predicted_variance = 0.0;
    // the limit the oracle converges to as h -> 0, for rate comparisons
    double limit_mean = 0.0;
    double limit_variance = 0.0;

    double empirical_mean = 0.0;
    double empirical_variance = 0.0;
    double ks_statistic = 0.0;
    double ks_p_value = 0.0;

    std::size_t n_failed = 0;
    std::size_t profile_fallbacks = 0;
    double wall_seconds = 0.0;
    std::optional<double> a_used;
    std::string note;

    std::vector<std::uint64_t> rep_seeds;
    std::vector<double> standardized;
};

// Runs the replication loop. Deterministic for a fixed config: replication m
// draws from streams derived only from (seed, m), and aggregation happens in
// index order, so the report is identical for any thread count. Throws when
// more than 1% of replications fail.
MonteCarloReport run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
    double h = 0.0;
    double empirical_variance = 0.0;
    double predicted_variance = 0.0;
    double limit_variance = 0.0;
    double ratio_to_limit = 0.0;
    double ks_p_value = 0.0;
};

struct SweepTable {
    std::string statistic;
    std::vector<SweepRow> rows;
};

// Re-runs the experiment across bandwidths (at least three) so variance
// trends against the limit law can be read off directly.
SweepTable rate_sweep(const ExperimentConfig& base, const std::vector<double>& bandwidths);

}  // namespace deconv
