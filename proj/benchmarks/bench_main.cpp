// Microbenchmarks for the paths that dominate Monte Carlo wall time: the
// per-observation inner integrals, the quadrature driver underneath them,
// scaled arithmetic, and sampling. Run with --benchmark_filter=... to focus.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "deconv/distributions.hpp"
#include "deconv/estimator.hpp"
#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"
#include "deconv/rng.hpp"
#include "deconv/scaled.hpp"
#include "deconv/stats.hpp"

using namespace deconv;

namespace {

void BM_scaled_mul_add(benchmark::State& state) {
    ScaledValue a = ScaledValue::from_log(312.4, 1);
    ScaledValue b = ScaledValue::from_log(-87.1, -1);
    ScaledValue c = ScaledValue::from_log(310.9, 1);
    for (auto _ : state) {
        ScaledValue r = scaled_add(scaled_mul(a, b), c);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_scaled_mul_add);

void BM_scaled_pairwise_sum(benchmark::State& state) {
    std::vector<ScaledValue> v;
    CounterRng rng(7);
    for (int i = 0; i < 4096; ++i) {
        v.push_back(ScaledValue::from_log(600.0 * rng.next_uniform(),
                                          rng.next_uniform() < 0.5 ? -1 : 1));
    }
    for (auto _ : state) {
        ScaledValue r = scaled_pairwise_sum(v);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_scaled_pairwise_sum);

// the integrand family the estimator spends its time on: exponential peak at
// s = 1 with an oscillation whose frequency is the benchmark argument
void BM_integrate_peaked_oscillatory(benchmark::State& state) {
    double freq = static_cast<double>(state.range(0));
    double h = 0.2;
    QuadratureSpec spec;
    ScaledIntegrand g;
    g.amplitude = [&](double s) { return std::cos(freq * s); };
    g.log_weight = [&](double s) { return s * s / (2.0 * h * h); };
    g.frequency = freq;
    g.peak_side = +1;
    for (auto _ : state) {
        ScaledValue r = integrate_scaled(g, 0.0, 1.0, spec);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_integrate_peaked_oscillatory)->Arg(1)->Arg(16)->Arg(128);

void BM_density_inner_integral(benchmark::State& state) {
    const KernelSpec& k = builtin_kernel("indicator");
    NoiseModel m = NoiseModel::normal(1.0);
    QuadratureSpec spec;
    double h = 0.1 * static_cast<double>(state.range(0));
    double d = 3.7;
    for (auto _ : state) {
        ScaledValue r = density_inner_integral(k, m, h, d, spec);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_density_inner_integral)->Arg(4)->Arg(2)->Arg(1);

void BM_interval_inner_integral(benchmark::State& state) {
    const KernelSpec& k = builtin_kernel("indicator");
    NoiseModel m = NoiseModel::normal(1.0);
    QuadratureSpec spec;
    double h = 0.2;
    double B = 3.141592653589793 / (2.0 * h);
    for (auto _ : state) {
        ScaledValue r = interval_inner_integral(k, m, h, B, 1.9, spec);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_interval_inner_integral);

void BM_estimate_density_n100(benchmark::State& state) {
    const KernelSpec& k = builtin_kernel("poly2");
    NoiseModel m = NoiseModel::normal(1.0);
    QuadratureSpec spec;
    Sample s;
    CounterRng rng(11);
    for (int i = 0; i < 100; ++i) s.x.push_back(1.4 * rng.next_normal());
    for (auto _ : state) {
        auto r = estimate_density(s, k, m, 0.3, 0.0, spec);
        benchmark::DoNotOptimize(r.value);
    }
    state.SetItemsProcessed(state.iterations() * s.n());
}
BENCHMARK(BM_estimate_density_n100);

void BM_stable_density_eval(benchmark::State& state) {
    NoiseModel m = NoiseModel::stable(1.5, 1.0);
    m.density(0.0);  // build the inversion grid outside the timed loop
    double z = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.density(z));
        z = z < 40.0 ? z + 0.01 : 0.0;
    }
}
BENCHMARK(BM_stable_density_eval);

void BM_stable_sampler(benchmark::State& state) {
    NoiseModel m = NoiseModel::stable(1.5, 1.0);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        std::vector<double> z = sample_noise(m, 1024, seed++);
        benchmark::DoNotOptimize(z.data());
    }
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_stable_sampler);

void BM_rng_normal(benchmark::State& state) {
    CounterRng rng(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.next_normal());
    }
}
BENCHMARK(BM_rng_normal);

void BM_ks_test(benchmark::State& state) {
    CounterRng rng(5);
    std::vector<double> v;
    for (int i = 0; i < 3000; ++i) v.push_back(rng.next_normal());
    for (auto _ : state) {
        KsResult r = ks_normal_test(v, 0.0, 1.0);
        benchmark::DoNotOptimize(r.statistic);
    }
}
BENCHMARK(BM_ks_test);

}  // namespace

BENCHMARK_MAIN();
