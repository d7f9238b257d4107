#include "deconv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "deconv/rng.hpp"
#include "deconv/stats.hpp"

namespace deconv {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& m) {
    static const std::set<std::string> known = {
        "statistic", "theorem",       "target",         "noise",  "kernel", "n",
        "replications", "M",          "seed",           "h",      "schedule",
        "schedule_base", "schedule_index", "width",     "x",      "a",
        "b",          "delta",        "gamma",          "threads", "profile_step",
        "output",     "format"};
    for (const auto& [k, v] : m.entries()) {
        if (!known.count(k)) throw std::invalid_argument("unknown config key: " + k);
    }

    ExperimentConfig cfg;
    cfg.raw = m;
    cfg.target = TargetModel::parse(m.get_string("target", "normal:0,1"));
    cfg.noise = NoiseModel::parse(m.get_string("noise", "normal:1"));
    cfg.kernel = builtin_kernel(m.get_string("kernel", "indicator"));

    std::string stat = m.get_string("statistic", m.get_string("theorem", ""));
    if (stat.empty()) throw std::invalid_argument("config needs statistic = T1..T7 or U");
    if (stat != "U") cfg.law = theorem_from_string(stat);

    auto n = m.get_int("n", 1000);
    auto M = m.get_int("replications", m.get_int("M", 100));
    if (n < 1 || M < 1) throw std::invalid_argument("n and replications must be at least 1");
    cfg.n = static_cast<std::size_t>(n);
    cfg.replications = static_cast<std::size_t>(M);
    cfg.seed = m.get_uint64("seed", 1);
    cfg.delta = m.get_double("delta", 0.5);
    cfg.threads = static_cast<int>(m.get_int("threads", 1));
    if (cfg.threads < 1) throw std::invalid_argument("threads must be at least 1");
    cfg.profile_step = m.get_double("profile_step", 0.01);
    if (!(cfg.profile_step > 0.0 && cfg.profile_step <= 0.1)) {
        throw std::invalid_argument("profile_step must lie in (0, 0.1]");
    }
    cfg.x = m.maybe_double("x");
    cfg.a = m.maybe_double("a");
    cfg.b = m.maybe_double("b");
    cfg.gamma = m.maybe_double("gamma");

    std::optional<double> width = m.maybe_double("width");
    if (!width && cfg.a && cfg.b) width = *cfg.b - *cfg.a;

    if (m.has("schedule")) {
        if (m.has("h")) throw std::invalid_argument("give either h or a schedule, not both");
        if (!width) throw std::invalid_argument("schedules need width (or endpoints a and b)");
        if (cfg.noise.is_noise_free()) {
            throw std::invalid_argument("lattice schedules are tied to the noise decay exponent");
        }
        std::string sv = m.get_string("schedule");
        ScheduleTarget target;
        if (sv == "A1") {
            target.variant = ConditionAVariant::A1;
        } else if (sv == "A2") {
            target.variant = ConditionAVariant::A2;
        } else if (sv == "A3" || sv.rfind("A3:", 0) == 0) {
            target.variant = ConditionAVariant::A3;
            target.gamma = sv == "A3" ? cfg.gamma.value_or(1.0) : std::stod(sv.substr(3));
        } else {
            throw std::invalid_argument("schedule must be A1, A2, or A3[:gamma]");
        }

        std::string bs = m.get_string("schedule_base", "sqrtlog");
        std::function<double(double)> base;
        if (bs == "sqrtlog") {
            base = [](double nn) { return std::sqrt(std::log(nn)); };
        } else if (bs.rfind("pow:", 0) == 0) {
            double p = std::stod(bs.substr(4));
            if (!(p > 0.0)) throw std::invalid_argument("schedule_base pow exponent must be positive");
            base = [p](double nn) { return std::pow(nn, p); };
        } else {
            throw std::invalid_argument("schedule_base must be sqrtlog or pow:<p>");
        }

        double lambda = cfg.noise.condition_k().lambda;
        auto sched = make_schedule(target, *width, lambda, base, bs);
        double idx = m.get_double("schedule_index", static_cast<double>(cfg.n));
        cfg.h = sched.rule(idx);
        std::ostringstream note;
        note << sched.description << " at index " << idx;
        if (sched.parity) note << " parity=" << sched.parity(idx);
        cfg.schedule_note = note.str();
        if (target.variant == ConditionAVariant::A3 && !cfg.gamma) cfg.gamma = target.gamma;
    } else {
        cfg.h = m.get_double("h");
    }
    if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) {
        throw std::invalid_argument("bandwidth must be positive and finite");
    }

    StatisticKind k = cfg.kind();
    if (k == StatisticKind::interval) {
        if (!cfg.a || !cfg.b) {
            if (!width) throw std::invalid_argument("interval statistics need a and b (or width)");
            cfg.a = -*width / 2.0;
            cfg.b = *width / 2.0;
        }
        if (!(*cfg.a < *cfg.b)) throw std::invalid_argument("need a < b");
    }
    if (k == StatisticKind::cdf && !cfg.b) {
        throw std::invalid_argument("distribution-function statistics need the evaluation point b");
    }
    if ((k == StatisticKind::density || k == StatisticKind::cauchy_closed ||
         k == StatisticKind::cosine) &&
        !cfg.x) {
        cfg.x = 0.0;
    }
    return cfg;
}

StatisticKind ExperimentConfig::kind() const {
    if (!law) return StatisticKind::cosine;
    switch (*law) {
        case TheoremId::T1:
        case TheoremId::T4:
            return StatisticKind::density;
        case TheoremId::T2a:
        case TheoremId::T2b:
        case TheoremId::T2c:
        case TheoremId::T5a:
        case TheoremId::T5b:
        case TheoremId::T5c:
            return StatisticKind::interval;
        case TheoremId::T3:
        case TheoremId::T6:
            return StatisticKind::cdf;
        case TheoremId::T7:
            return StatisticKind::cauchy_closed;
    }
    throw std::logic_error("unreachable");
}

std::string ExperimentConfig::statistic_name() const {
    return law ? theorem_to_string(*law) : "U";
}

namespace {

double sine_factor(double s, double B) {
    // sin(sB)/s with the s -> 0 limit
    return s < 1e-8 ? B : std::sin(s * B) / s;
}

// Per-observation inner integral tabulated on a uniform grid in
// d = (X - center)/h. Values are mantissas at a fixed log offset L so the
// replication loop works in plain doubles. The integrand is even in d,
// so only d >= 0 is stored.
struct ProfileTable {
    double step = 0.01;
    double L = 0.0;
    std::vector<double> vals;

    bool empty() const { return vals.empty(); }
    double max_d() const {
        return vals.size() < 4 ? 0.0 : (static_cast<double>(vals.size()) - 3.0) * step;
    }

    double eval(double ad) const {
        double t = ad / step;
        auto i = static_cast<std::size_t>(t);
        if (i < 1) i = 1;
        double u = t - static_cast<double>(i);
        double p0 = vals[i - 1], p1 = vals[i], p2 = vals[i + 1], p3 = vals[i + 2];
        double um1 = u + 1.0, u1 = u - 1.0, u2 = u - 2.0;
        return -p0 * u * u1 * u2 / 6.0 + p1 * um1 * u1 * u2 / 2.0 - p2 * um1 * u * u2 / 2.0 +
               p3 * um1 * u * u1 / 6.0;
    }
};

double target_variance(const TargetModel& t) {
    switch (t.family()) {
        case TargetModel::Family::normal:
            return t.sds()[0] * t.sds()[0];
        case TargetModel::Family::uniform: {
            double w = t.hi() - t.lo();
            return w * w / 12.0;
        }
        case TargetModel::Family::mixture: {
            double second = 0.0;
            for (std::size_t i = 0; i < t.weights().size(); ++i) {
                second += t.weights()[i] *
                          (t.sds()[i] * t.sds()[i] + t.means()[i] * t.means()[i]);
            }
            return second - t.mean() * t.mean();
        }
    }
    throw std::logic_error("unreachable");
}

// How far out in d = (X - center)/h the table must reach so that lookups
// beyond it are rare enough to take the exact-integral fallback.
double profile_reach(const ExperimentConfig& cfg, double center) {
    const auto& noise = cfg.noise;
    double offset = std::abs(cfg.target.mean() - center);
    bool light = noise.family() == NoiseModel::Family::normal ||
                 noise.family() == NoiseModel::Family::none ||
                 (noise.family() == NoiseModel::Family::stable &&
                  noise.condition_k().lambda == 2.0);
    if (light) {
        double nv = 0.0;
        if (noise.family() == NoiseModel::Family::normal) nv = noise.scale() * noise.scale();
        if (noise.family() == NoiseModel::Family::stable) nv = 2.0 * noise.scale() * noise.scale();
        return offset + 14.0 * std::sqrt(target_variance(cfg.target) + nv);
    }
    double draws = static_cast<double>(cfg.n) * static_cast<double>(cfg.replications);
    double ptail = std::min(0.01, 100.0 / draws);
    double c = noise.scale(), lambda = noise.condition_k().lambda;
    double radius;
    if (noise.family() == NoiseModel::Family::cauchy) {
        radius = 2.0 * c / (kPi * ptail);
    } else {
        double tail_k = std::pow(c, lambda) * gamma_fn(lambda) * std::sin(kPi * lambda / 2.0) / kPi;
        radius = std::pow(2.0 * tail_k / ptail, 1.0 / lambda);
    }
    return offset + cfg.target.spread() + radius;
}

ProfileTable build_profile(const ExperimentConfig& cfg, double center, bool interval, double B) {
    ProfileTable table;
    table.step = cfg.profile_step;
    double d_max = std::clamp(profile_reach(cfg, center) / cfg.h, 10.0, 1500.0);
    auto count = static_cast<std::size_t>(std::ceil(d_max / table.step)) + 4;
    table.L = -cfg.noise.log_phi_k(1.0 / cfg.h);
    table.vals.assign(count, 0.0);

    auto nodes = build_quad_nodes(0.0, 1.0, cfg.quad, d_max, 1, 1, false);
    for (const QuadNode& nd : nodes) {
        double coef = nd.w * phi_w_eval(cfg.kernel, nd.s) *
                      std::exp(-cfg.noise.log_phi_k(nd.s / cfg.h) - table.L);
        if (interval) coef *= sine_factor(nd.s, B);
        if (coef == 0.0) continue;
        double delta = nd.s * table.step;
        double cd = std::cos(delta), sd = std::sin(delta);
        double c = 1.0, sn = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            table.vals[k] += coef * c;
            double cn = c * cd - sn * sd;
            sn = sn * cd + c * sd;
            c = cn;
        }
    }
    return table;
}

struct StatContext {
    StatisticKind kind = StatisticKind::density;
    double h = 0.0;
    double center = 0.0;  // x for pointwise statistics, interval midpoint otherwise
    double B = 0.0;
    double expected = 0.0;  // exact mean of the raw estimator
    double e_cos = 0.0;     // cosine-statistic centering
    ScaledValue norm{1.0, 0.0};
    ProfileTable table;
};

double evaluate_statistic(const ExperimentConfig& cfg, const StatContext& ctx,
                          const std::vector<double>& xs, std::atomic<std::size_t>& fallbacks) {
    std::size_t n = xs.size();
    double sqn = std::sqrt(static_cast<double>(n));

    if (ctx.kind == StatisticKind::cosine) {
        std::vector<double> terms(n);
        for (std::size_t j = 0; j < n; ++j) {
            terms[j] = std::cos((xs[j] - ctx.center) / ctx.h);
        }
        return (pairwise_sum(terms) - static_cast<double>(n) * ctx.e_cos) / sqn;
    }

    if (ctx.kind == StatisticKind::cauchy_closed) {
        double em = std::exp(-1.0 / ctx.h);
        std::vector<double> terms(n);
        for (std::size_t j = 0; j < n; ++j) {
            double d = xs[j] - ctx.center;
            terms[j] = (std::cos(d / ctx.h) + d * std::sin(d / ctx.h) - em) /
                       (kPi * (1.0 + d * d));
        }
        return sqn * (pairwise_sum(terms) / static_cast<double>(n) - em * ctx.expected);
    }

    // density / interval / cdf through the tabulated inner integral
    double dcap = ctx.table.max_d();
    std::vector<double> terms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = (xs[j] - ctx.center) / ctx.h;
        double ad = std::abs(d);
        if (ad <= dcap) {
            terms[j] = ctx.table.eval(ad);
        } else {
            fallbacks.fetch_add(1, std::memory_order_relaxed);
            ScaledValue v = ctx.kind == StatisticKind::density
                                ? density_inner_integral(cfg.kernel, cfg.noise, ctx.h, d, cfg.quad)
                                : interval_inner_integral(cfg.kernel, cfg.noise, ctx.h, ctx.B, d,
                                                          cfg.quad);
            terms[j] = v.is_zero() ? 0.0
                                   : v.mantissa * std::exp(v.log_scale - ctx.table.L);
        }
    }
    double sum = pairwise_sum(terms);
    double factor = ctx.kind == StatisticKind::density
                        ? 1.0 / (kPi * static_cast<double>(n) * ctx.h)
                        : 2.0 / (kPi * static_cast<double>(n));
    ScaledValue est = sum == 0.0 ? ScaledValue{0.0, 0.0}
                                 : scaled_normalize({sum * factor, ctx.table.L});
    ScaledValue centered = scaled_sub(est, ScaledValue::from_double(ctx.expected));
    return scaled_mul(ctx.norm, centered).to_double();
}

}  // namespace

MonteCarloReport run_experiment(const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    StatisticKind kind = cfg.kind();

    MonteCarloReport rep;
    rep.statistic = cfg.statistic_name();
    rep.config_hash = cfg.raw.hash();
    rep.config_entries = cfg.raw.entries();
    rep.n = cfg.n;
    rep.replications = cfg.replications;
    rep.h = cfg.h;
    rep.seed = cfg.seed;
    rep.note = cfg.schedule_note;

    StatContext ctx;
    ctx.kind = kind;
    ctx.h = cfg.h;

    double a_eff = 0.0, b_eff = 0.0;
    if (kind == StatisticKind::interval) {
        a_eff = *cfg.a;
        b_eff = *cfg.b;
    } else if (kind == StatisticKind::cdf) {
        a_eff = cfg.a ? *cfg.a : cdf_rule_a(cfg.noise, cfg.h, cfg.delta);
        b_eff = *cfg.b;
        if (!(a_eff < b_eff)) {
            throw std::invalid_argument("lower cutoff does not sit below the evaluation point");
        }
        rep.a_used = a_eff;
    }

    // reference law
    if (kind == StatisticKind::cosine) {
        double x = *cfg.x, h = cfg.h;
        auto moment = [&](double t) {
            return (cfg.target.char_fn(t) * std::polar(1.0, -t * x)).real() *
                   std::exp(cfg.noise.log_phi_k(t));
        };
        ctx.e_cos = moment(1.0 / h);
        ctx.center = x;
        rep.predicted_variance = 0.5 * (1.0 + moment(2.0 / h)) - ctx.e_cos * ctx.e_cos;
        rep.limit_variance = 0.5;
    } else {
        LimitLawExtras extras;
        extras.x = cfg.x;
        extras.delta = cfg.delta;
        extras.gamma = cfg.gamma;
        extras.target = &cfg.target;
        extras.quad = cfg.quad;
        if (kind == StatisticKind::interval || kind == StatisticKind::cdf) {
            extras.a = a_eff;
            extras.b = b_eff;
        }
        LimitLaw law = limit_law(*cfg.law, cfg.kernel, cfg.noise, extras);
        ctx.norm = law.normalizer(static_cast<double>(cfg.n), cfg.h);
        rep.limit_mean = law.limit_mean;
        rep.limit_variance = law.limit_variance;
        if (!law.note.empty()) {
            rep.note += rep.note.empty() ? law.note : "; " + law.note;
        }

        ScaledValue term_var;
        if (kind == StatisticKind::density || kind == StatisticKind::cauchy_closed) {
            ctx.center = *cfg.x;
            ctx.expected = expected_density(cfg.target, cfg.kernel, cfg.h, ctx.center, cfg.quad);
            term_var = exact_term_variance(cfg.target, cfg.noise, cfg.kernel, cfg.h, ctx.center,
                                           cfg.quad);
        } else {
            ctx.center = 0.5 * (a_eff + b_eff);
            ctx.B = (b_eff - a_eff) / (2.0 * cfg.h);
            ctx.expected = expected_interval(cfg.target, cfg.kernel, cfg.h, a_eff, b_eff, cfg.quad);
            term_var = exact_interval_term_variance(cfg.target, cfg.noise, cfg.kernel, cfg.h,
                                                    a_eff, b_eff, cfg.quad);
        }
        ScaledValue norm2 = scaled_mul(ctx.norm, ctx.norm);
        rep.predicted_variance =
            scaled_mul(norm2, term_var).to_double() / static_cast<double>(cfg.n);

        if (kind == StatisticKind::density || kind == StatisticKind::interval ||
            kind == StatisticKind::cdf) {
            bool interval_table = kind != StatisticKind::density;
            ctx.table = build_profile(cfg, ctx.center, interval_table, ctx.B);
        }
    }

    // replication loop; everything a worker touches besides its own slots is const
    std::size_t M = cfg.replications;
    std::vector<double> stats(M, std::numeric_limits<double>::quiet_NaN());
    rep.rep_seeds.assign(M, 0);
    std::atomic<std::size_t> next{0}, failed{0}, fallbacks{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t mrep = next.fetch_add(1);
            if (mrep >= M) return;
            std::uint64_t rep_key = rng::derive_key(cfg.seed, mrep);
            rep.rep_seeds[mrep] = rep_key;
            try {
                std::vector<double> xs = cfg.target.sample(cfg.n, rng::derive_key(rep_key, 0));
                std::vector<double> zs = sample_noise(cfg.noise, cfg.n, rng::derive_key(rep_key, 1));
                for (std::size_t j = 0; j < cfg.n; ++j) xs[j] += zs[j];
                stats[mrep] = evaluate_statistic(cfg, ctx, xs, fallbacks);
            } catch (const std::exception&) {
                failed.fetch_add(1);
            }
        }
    };

    int nthreads = std::min<int>(cfg.threads, static_cast<int>(M));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    rep.n_failed = failed.load();
    rep.profile_fallbacks = fallbacks.load();
    if (static_cast<double>(rep.n_failed) > 0.01 * static_cast<double>(M)) {
        throw std::runtime_error("experiment aborted: " + std::to_string(rep.n_failed) + " of " +
                                 std::to_string(M) + " replications failed");
    }
    rep.standardized.reserve(M - rep.n_failed);
    for (double v : stats) {
        if (!std::isnan(v)) rep.standardized.push_back(v);
    }

    if (rep.standardized.size() >= 2) {
        MeanVar mv = mean_and_variance(rep.standardized);
        rep.empirical_mean = mv.mean;
        rep.empirical_variance = mv.variance;
    }
    if (rep.standardized.size() >= 8 && rep.predicted_variance > 0.0) {
        KsResult ks = ks_normal_test(rep.standardized, rep.predicted_mean, rep.predicted_variance);
        rep.ks_statistic = ks.statistic;
        rep.ks_p_value = ks.p_value;
    }

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

SweepTable rate_sweep(const ExperimentConfig& base, const std::vector<double>& bandwidths) {
    if (bandwidths.size() < 3) {
        throw std::invalid_argument("a rate sweep needs at least three bandwidths");
    }
    SweepTable table;
    table.statistic = base.statistic_name();
    for (double h : bandwidths) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw std::invalid_argument("sweep bandwidths must be positive");
        }
        ExperimentConfig cfg = base;
        cfg.h = h;
        cfg.schedule_note.clear();
        cfg.raw.set("h", fmt_double(h));
        MonteCarloReport rep = run_experiment(cfg);
        SweepRow row;
        row.h = h;
        row.empirical_variance = rep.empirical_variance;
        row.predicted_variance = rep.predicted_variance;
        row.limit_variance = rep.limit_variance;
        row.ratio_to_limit =
            rep.limit_variance > 0.0 ? rep.empirical_variance / rep.limit_variance : 0.0;
        row.ks_p_value = rep.ks_p_value;
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace deconv
