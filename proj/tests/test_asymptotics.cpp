#include <doctest.h>

#include <cmath>
#include <vector>

#include "deconv/asymptotics.hpp"
#include "deconv/rng.hpp"
#include "deconv/stats.hpp"

using namespace deconv;

namespace {

const std::vector<double> kLadder{1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9};

BandwidthSchedule raw_schedule(std::function<double(double)> u_of, double width) {
    BandwidthSchedule s;
    s.rule = [u_of](double n) { return 1.0 / (2.0 * u_of(n)); };
    s.interval_width = width;
    s.description = "hand-built";
    return s;
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("lattice neighbors") {
    auto [a1, b1] = lattice_neighbors(2.5, M_PI);
    CHECK(a1 == doctest::Approx(2.0));
    CHECK(b1 == doctest::Approx(3.0));

    auto [a2, b2] = lattice_neighbors(4.0, M_PI);
    CHECK(a2 == b2);
    CHECK(a2 == doctest::Approx(4.0));

    auto [a3, b3] = lattice_neighbors(1.0, 2.0);
    CHECK(a3 == doctest::Approx(0.0));
    CHECK(b3 == doctest::Approx(M_PI / 2.0));

    CounterRng g = CounterRng::for_stream(55, 0);
    for (int c = 0; c < 100; ++c) {
        double width = 0.5 + 3.0 * g.next_uniform();
        double u = 20.0 * g.next_uniform();
        auto [lo, hi] = lattice_neighbors(u, width);
        double gap = M_PI / width;
        CHECK(lo <= u + 1e-12);
        CHECK(hi >= u - 1e-12);
        CHECK(hi - lo <= gap + 1e-9);
        // both ends sit on the lattice
        CHECK(std::abs(lo * width / M_PI - std::round(lo * width / M_PI)) < 1e-9);
        CHECK(std::abs(hi * width / M_PI - std::round(hi * width / M_PI)) < 1e-9);
    }

    CHECK_THROWS_AS(lattice_neighbors(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lattice_neighbors(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("classification of the three schedule regimes") {
    // snapped onto the lattice: the near gap collapses
    BandwidthSchedule a2 = make_schedule({ConditionAVariant::A2, 1.0}, M_PI, 2.0,
                                         [](double n) { return std::sqrt(std::log(n)); },
                                         "sqrtlog");
    ConditionAClass c2 = classify_condition_a(a2, 2.0, kLadder, 0.05);
    CHECK(c2.variant == ConditionAVariant::A2);
    CHECK(c2.diagnostics.size() == kLadder.size());

    // lattice midpoints: both scaled gaps diverge, but only visibly once u is
    // large, hence the deep probe indices and the looser tolerance
    BandwidthSchedule a1 = make_schedule({ConditionAVariant::A1, 1.0}, M_PI, 2.0,
                                         [](double n) { return std::sqrt(std::log(n)); },
                                         "sqrtlog");
    ConditionAClass c1 =
        classify_condition_a(a1, 2.0, {1e174, 1e250, 1e300}, 0.1);
    CHECK(c1.variant == ConditionAVariant::A1);

    // drifting into the lattice at the critical rate: u = k + 0.7/k with
    // k = floor(sqrt(log n)) holds k = 4 over the last three probes
    auto drift = [](double n) {
        double k = std::floor(std::sqrt(std::log(n)));
        return k + 0.7 / k;
    };
    ConditionAClass c3 = classify_condition_a(raw_schedule(drift, M_PI), 2.0, kLadder, 0.05);
    CHECK(c3.variant == ConditionAVariant::A3);
    CHECK(c3.gamma == doctest::Approx(0.730625).epsilon(1e-9));
    CHECK(c3.side == "lower");

    // an unsnapped sqrt-log schedule wanders relative to the lattice
    auto wander = [](double n) { return std::sqrt(std::log(n)); };
    ConditionAClass cu =
        classify_condition_a(raw_schedule(wander, M_PI), 2.0, {1e7, 1e8, 1e9}, 0.05);
    CHECK(cu.variant == ConditionAVariant::Unclassified);
}

TEST_CASE("classification input validation") {
    BandwidthSchedule s = raw_schedule([](double) { return 2.0; }, M_PI);
    CHECK_THROWS_AS(classify_condition_a(s, 2.0, {1e3, 1e4}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(classify_condition_a(s, 2.0, {1e4, 1e3, 1e5}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(classify_condition_a(s, 2.0, {1e3, 1e4, 1e5}, 0.0), std::invalid_argument);

    BandwidthSchedule no_width = s;
    no_width.interval_width.reset();
    CHECK_THROWS_AS(classify_condition_a(no_width, 2.0, {1e3, 1e4, 1e5}, 0.05),
                    std::invalid_argument);

    BandwidthSchedule bad = raw_schedule([](double) { return -1.0; }, M_PI);
    CHECK_THROWS_AS(classify_condition_a(bad, 2.0, {1e3, 1e4, 1e5}, 0.05),
                    std::invalid_argument);
}

TEST_CASE("constructed schedules hit their pinned bandwidths") {
    auto sqrtlog = [](double n) { return std::sqrt(std::log(n)); };
    BandwidthSchedule a1 = make_schedule({ConditionAVariant::A1, 1.0}, M_PI, 2.0, sqrtlog);
    CHECK(a1.rule(10) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(a1.rule(520) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(a1.rule(210000) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
    for (double n : {10.0, 520.0, 210000.0}) {
        double u = 1.0 / (2.0 * a1.rule(n));
        CHECK(std::abs(std::sin(M_PI * u)) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(a1.description.find("A1") != std::string::npos);
    CHECK_FALSE(a1.parity);

    BandwidthSchedule a2 = make_schedule({ConditionAVariant::A2, 1.0}, M_PI, 2.0, sqrtlog);
    CHECK(a2.rule(520) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(a2.rule(210000) == doctest::Approx(0.125).epsilon(1e-14));
    for (double n : {520.0, 210000.0}) {
        double u = 1.0 / (2.0 * a2.rule(n));
        CHECK(std::abs(std::sin(M_PI * u)) < 1e-12);
    }
}

TEST_CASE("critical-drift schedules solve the offset equation exactly") {
    auto sqrtlog = [](double n) { return std::sqrt(std::log(n)); };
    for (double lambda : {1.5, 2.0}) {
        BandwidthSchedule s =
            make_schedule({ConditionAVariant::A3, 1.3}, M_PI, lambda, sqrtlog);
        REQUIRE(s.parity);
        for (double n : kLadder) {
            double u = 1.0 / (2.0 * s.rule(n));
            auto [lo, hi] = lattice_neighbors(u, M_PI);
            CHECK(hi > u);  // approaches its lattice point from below
            CHECK(std::pow(u, lambda - 1.0) * (hi - u) == doctest::Approx(1.3).epsilon(1e-9));
            int k = (int)std::llround(hi);
            CHECK(s.parity(n) == (k & 1));
        }
    }
}

TEST_CASE("classification recovers constructed schedules across widths") {
    auto logbase = [](double n) { return std::log(n); };
    for (double width : {1.0, M_PI, 2.0 * M_PI}) {
        for (double lambda : {1.5, 2.0}) {
            BandwidthSchedule a2 =
                make_schedule({ConditionAVariant::A2, 1.0}, width, lambda, logbase);
            CHECK(classify_condition_a(a2, lambda, kLadder, 1e-6).variant ==
                  ConditionAVariant::A2);
        }
    }
    struct Case {
        double gamma, width, lambda;
    } cases[] = {
        {0.1, M_PI, 1.5}, {0.1, 2.0 * M_PI, 2.0}, {1.0, M_PI, 2.0},
        {1.0, 2.0 * M_PI, 1.5}, {1.0, 1.0, 1.5},  {10.0, 1.0, 2.0},
    };
    for (const Case& c : cases) {
        BandwidthSchedule s =
            make_schedule({ConditionAVariant::A3, c.gamma}, c.width, c.lambda, logbase);
        ConditionAClass got = classify_condition_a(s, c.lambda, kLadder, 1e-6);
        CHECK(got.variant == ConditionAVariant::A3);
        CHECK(got.gamma == doctest::Approx(c.gamma).epsilon(1e-9));
        CHECK(got.side == "upper");
    }
}

TEST_CASE("schedule construction rejects bad inputs") {
    auto sqrtlog = [](double n) { return std::sqrt(std::log(n)); };
    CHECK_THROWS_AS(make_schedule({ConditionAVariant::A2, 1.0}, -1.0, 2.0, sqrtlog),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_schedule({ConditionAVariant::A3, 0.0}, M_PI, 2.0, sqrtlog),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_schedule({ConditionAVariant::Unclassified, 1.0}, M_PI, 2.0, sqrtlog),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_schedule({ConditionAVariant::A2, 1.0}, M_PI, 2.0, nullptr),
                    std::invalid_argument);
    // a shrinking base gives a flat (or growing) bandwidth ladder
    CHECK_THROWS_AS(
        make_schedule({ConditionAVariant::A2, 1.0}, M_PI, 2.0, [](double n) { return 1.0 / n; }),
        std::invalid_argument);
}

TEST_CASE("limit-law id round trip") {
    const char* names[] = {"T1", "T2a", "T2b", "T2c", "T3", "T4", "T5a", "T5b", "T5c", "T6", "T7"};
    for (const char* s : names) {
        CHECK(theorem_to_string(theorem_from_string(s)) == s);
    }
    CHECK_THROWS_AS(theorem_from_string("T9"), std::invalid_argument);
}

TEST_CASE("pointwise limit law under gaussian-type noise") {
    const KernelSpec& ind = builtin_kernel("indicator");
    NoiseModel nm = NoiseModel::normal(1.0);
    LimitLawExtras ex;
    LimitLaw law = limit_law(TheoremId::T1, ind, nm, ex);
    CHECK(law.limit_variance == doctest::Approx(1.0 / (2.0 * M_PI * M_PI)).epsilon(1e-14));
    CHECK(law.limit_mean == 0.0);
    CHECK(law.normalizer(1e4, 0.4).log_abs() == doctest::Approx(2.396460918).epsilon(1e-9));

    LimitLaw p2 = limit_law(TheoremId::T1, builtin_kernel("poly2"), nm, ex);
    CHECK(p2.limit_variance == doctest::Approx(64.0 / (2.0 * M_PI * M_PI)).epsilon(1e-14));
}

TEST_CASE("interval limit laws under gaussian-type noise") {
    const KernelSpec& ind = builtin_kernel("indicator");
    NoiseModel nm = NoiseModel::normal(1.0);

    LimitLawExtras half_pi;
    half_pi.a = -M_PI / 2.0;
    half_pi.b = M_PI / 2.0;
    LimitLaw t2a = limit_law(TheoremId::T2a, ind, nm, half_pi);
    CHECK(t2a.limit_variance == doctest::Approx(2.0 / (M_PI * M_PI)).epsilon(1e-14));
    // at u = 1.5 the oscillation factor is |sin(1.5 pi)| = 1
    double h = 1.0 / 3.0;
    CHECK(t2a.normalizer(1e4, h).log_abs() ==
          doctest::Approx(0.5 * std::log(1e4) - 2.0 * std::log(h) - 1.0 / (2.0 * h * h))
              .epsilon(1e-12));

    LimitLawExtras unit;
    unit.a = 0.0;
    unit.b = 1.0;
    LimitLaw t2b = limit_law(TheoremId::T2b, ind, nm, unit);
    CHECK(t2b.limit_variance == doctest::Approx(1.0 / (2.0 * M_PI * M_PI)).epsilon(1e-14));
    // normalizer exponent: h^{-(2+alpha) lambda - lambda0 + 1} = h^{-3}
    double l04 = t2b.normalizer(1e4, 0.4).log_abs();
    CHECK(l04 == doctest::Approx(0.5 * std::log(1e4) - 3.0 * std::log(0.4) -
                                 1.0 / (2.0 * 0.16))
                     .epsilon(1e-12));

    LimitLawExtras crit = half_pi;
    crit.gamma = 1.0;
    LimitLaw t2c = limit_law(TheoremId::T2c, ind, nm, crit);
    CHECK(t2c.limit_variance == doctest::Approx(12.5).epsilon(1e-13));

    LimitLawExtras none;
    LimitLaw t3 = limit_law(TheoremId::T3, ind, nm, none);
    CHECK(t3.limit_variance == doctest::Approx(1.0 / (2.0 * M_PI * M_PI)).epsilon(1e-14));
    CHECK(t3.normalizer(1e4, 0.4).log_abs() ==
          doctest::Approx(0.5 * std::log(1e4) - 2.0 * std::log(0.4) - 1.0 / 0.32)
              .epsilon(1e-12));
}

TEST_CASE("general-decay laws reduce to the gaussian ones at lambda = 2") {
    NoiseModel nm = NoiseModel::normal(0.7);
    LimitLawExtras ex;
    ex.a = -1.0;
    ex.b = 2.0;
    ex.gamma = 0.4;
    struct Pair {
        TheoremId general, special;
    } pairs[] = {
        {TheoremId::T4, TheoremId::T1},
        {TheoremId::T5a, TheoremId::T2a},
        {TheoremId::T5b, TheoremId::T2b},
        {TheoremId::T5c, TheoremId::T2c},
        {TheoremId::T6, TheoremId::T3},
    };
    for (const char* kname : {"indicator", "poly1", "poly3"}) {
        const KernelSpec& k = builtin_kernel(kname);
        for (const Pair& p : pairs) {
            LimitLaw g = limit_law(p.general, k, nm, ex);
            LimitLaw s = limit_law(p.special, k, nm, ex);
            CHECK(g.limit_variance == doctest::Approx(s.limit_variance).epsilon(1e-12));
            CHECK(g.normalizer(3000, 0.37).log_abs() ==
                  doctest::Approx(s.normalizer(3000, 0.37).log_abs()).epsilon(1e-12));
        }
    }
}

TEST_CASE("general-decay laws accept heavier-than-gaussian stable noise") {
    NoiseModel st = NoiseModel::parse("stable:1.5,1");
    const KernelSpec& ind = builtin_kernel("indicator");
    LimitLawExtras ex;
    LimitLaw t4 = limit_law(TheoremId::T4, ind, st, ex);
    // r = mu / lambda = (1 / c^lambda) / lambda = 2/3 for c = 1
    CHECK(t4.limit_variance ==
          doctest::Approx(std::pow(2.0 / 3.0, 2.0) / (2.0 * M_PI * M_PI)).epsilon(1e-12));
    // normalizer exponent lambda(1+alpha)+lambda0-1 = 0.5 and decay e^{-1/(mu h^lambda)}
    CHECK(t4.normalizer(1e4, 0.25).log_abs() ==
          doctest::Approx(0.5 * std::log(1e4) - 0.5 * std::log(0.25) -
                          std::pow(0.25, -1.5))
              .epsilon(1e-12));
}

TEST_CASE("limit-law domain restrictions") {
    const KernelSpec& ind = builtin_kernel("indicator");
    LimitLawExtras ex;
    CHECK_THROWS_AS(limit_law(TheoremId::T1, ind, NoiseModel::parse("stable:1.5,1"), ex),
                    std::domain_error);
    CHECK_THROWS_AS(limit_law(TheoremId::T4, ind, NoiseModel::cauchy(1.0), ex),
                    std::domain_error);
    CHECK_THROWS_AS(limit_law(TheoremId::T1, ind, NoiseModel::noise_free(), ex),
                    std::domain_error);
    // interval laws without endpoints
    CHECK_THROWS_AS(limit_law(TheoremId::T2b, ind, NoiseModel::normal(1.0), ex),
                    std::domain_error);
    LimitLawExtras no_gamma;
    no_gamma.a = 0.0;
    no_gamma.b = 1.0;
    CHECK_THROWS_AS(limit_law(TheoremId::T2c, ind, NoiseModel::normal(1.0), no_gamma),
                    std::domain_error);
}

TEST_CASE("cauchy-noise law") {
    const KernelSpec& ind = builtin_kernel("indicator");
    NoiseModel ca = NoiseModel::cauchy(1.0);
    TargetModel n01 = TargetModel::normal(0.0, 1.0);
    LimitLawExtras ex;
    ex.x = 0.0;
    ex.target = &n01;
    LimitLaw law = limit_law(TheoremId::T7, ind, ca, ex);
    CHECK(law.limit_variance == doctest::Approx(0.0213468145).epsilon(1e-8));
    CHECK(law.limit_mean == 1.0);
    CHECK_FALSE(law.note.empty());
    CHECK(law.normalizer(100.0, 0.5).log_abs() ==
          doctest::Approx(0.5 * std::log(100.0) - 2.0).epsilon(1e-14));

    CHECK_THROWS_AS(limit_law(TheoremId::T7, builtin_kernel("poly2"), ca, ex),
                    std::domain_error);
    CHECK_THROWS_AS(limit_law(TheoremId::T7, ind, NoiseModel::cauchy(2.0), ex),
                    std::domain_error);
    CHECK_THROWS_AS(limit_law(TheoremId::T7, ind, NoiseModel::normal(1.0), ex),
                    std::domain_error);
    LimitLawExtras bare;
    CHECK_THROWS_AS(limit_law(TheoremId::T7, ind, ca, bare), std::domain_error);
}

TEST_CASE("deterministic interval coefficient") {
    const KernelSpec& ind = builtin_kernel("indicator");
    NoiseModel nm = NoiseModel::normal(1.0);

    // B = (b-a)/(2h) = pi: the sine term dies, |tau| = h / pi
    double h = 1.0 / (2.0 * M_PI);
    CHECK(std::abs(tau_n_eval(ind, nm, 0.0, 1.0, h)) == doctest::Approx(h / M_PI).epsilon(1e-12));

    // B = pi/2: the cosine term dies, tau = 2 / pi
    h = 1.0 / M_PI;
    CHECK(tau_n_eval(ind, nm, 0.0, 1.0, h) == doctest::Approx(2.0 / M_PI).epsilon(1e-12));

    // B = pi/4: both terms present
    h = 2.0 / M_PI;
    double want = (1.0 / M_PI) * (2.0 * std::sin(M_PI / 4.0) +
                                  std::cos(M_PI / 4.0) * h);
    CHECK(tau_n_eval(ind, nm, 0.0, 1.0, h) == doctest::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(tau_n_eval(ind, NoiseModel::noise_free(), 0.0, 1.0, 0.3),
                    std::domain_error);
    CHECK_THROWS_AS(tau_n_eval(ind, nm, 1.0, 1.0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(tau_n_eval(ind, nm, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("endpoint integrals: pinned exact values") {
    struct Row {
        const char* kernel;
        double lambda, mu, lambda0, beta, h, eps, ln;
    } rows[] = {
        {"indicator", 2.0, 2.0, 0.0, 0.0, 0.1, 0.0, 45.405093122112},
        {"poly2", 1.5, 1.0, 0.5, 2.0, 0.2, 0.0, 2.206399726679},
        {"poly3", 2.0, 2.0, 0.0, 3.0, 0.05, 0.0, 166.763103035938},
        {"indicator", 1.5, 1.0, 0.0, 1.0, 0.3, 0.3, 1.834183168821},
        {"poly1", 2.0, 2.0, 0.0, 0.0, 0.5, 0.0, 0.102830324569},
    };
    for (const Row& r : rows) {
        ScaledValue v = laplace_exact(builtin_kernel(r.kernel), r.eps, r.beta, r.lambda, r.mu,
                                      r.lambda0, r.h);
        CHECK(v.sign() > 0);
        CHECK(v.log_abs() == doctest::Approx(r.ln).epsilon(1e-9));
    }
}

TEST_CASE("endpoint expansion: structure and accuracy") {
    // bumping beta multiplies the leading term by (mu/lambda) h^lambda (alpha+beta+1)
    const KernelSpec& p2 = builtin_kernel("poly2");
    double lambda = 1.5, mu = 1.0, h = 0.3;
    ScaledValue b0 = laplace_asymptotic(p2, 0.0, 0.0, lambda, mu, 0.0, h);
    ScaledValue b1 = laplace_asymptotic(p2, 0.0, 1.0, lambda, mu, 0.0, h);
    double want = std::log((mu / lambda) * std::pow(h, lambda) *
                           gamma_fn(p2.alpha + 2.0) / gamma_fn(p2.alpha + 1.0));
    CHECK(b1.log_abs() - b0.log_abs() == doctest::Approx(want).epsilon(1e-12));

    // the expansion tracks the exact integral to first order as h shrinks
    struct Triple {
        double lambda, mu, lambda0;
    } triples[] = {{2.0, 2.0, 0.0}, {1.5, 1.0, 0.0}, {1.5, 1.0, 0.5}};
    for (const std::string& kname : builtin_kernel_names()) {
        const KernelSpec& k = builtin_kernel(kname);
        for (const Triple& t : triples) {
            ScaledValue ex = laplace_exact(k, 0.0, 0.0, t.lambda, t.mu, t.lambda0, 0.05);
            ScaledValue as = laplace_asymptotic(k, 0.0, 0.0, t.lambda, t.mu, t.lambda0, 0.05);
            double dev = std::abs(std::expm1(ex.log_abs() - as.log_abs()));
            CHECK(dev < 0.03);
        }
    }
}

TEST_CASE("endpoint integral input validation") {
    const KernelSpec& ind = builtin_kernel("indicator");
    CHECK_THROWS_AS(laplace_exact(ind, 0.0, 0.0, 2.0, 2.0, 1.0, 0.1), std::domain_error);
    CHECK_NOTHROW(laplace_exact(ind, 0.1, 0.0, 2.0, 2.0, 1.0, 0.1));
    CHECK_THROWS_AS(laplace_exact(ind, 1.0, 0.0, 2.0, 2.0, 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(laplace_exact(ind, -0.1, 0.0, 2.0, 2.0, 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(laplace_exact(ind, 0.0, -1.0, 2.0, 2.0, 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(laplace_asymptotic(ind, 0.0, 0.0, 0.0, 2.0, 0.0, 0.1),
                    std::invalid_argument);
}

}  // TEST_SUITE
