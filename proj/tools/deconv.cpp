// Command-line front end: pointwise/interval/cdf estimation, exact
// expectations, asymptotic tooling, and the Monte Carlo driver.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deconv/asymptotics.hpp"
#include "deconv/config.hpp"
#include "deconv/distributions.hpp"
#include "deconv/estimator.hpp"
#include "deconv/harness.hpp"
#include "deconv/kernels.hpp"
#include "deconv/report_io.hpp"
#include "deconv/rng.hpp"
#include "deconv/stats.hpp"

using nlohmann::json;
using namespace deconv;

namespace {

std::vector<double> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sample file: " + path);
    std::vector<double> xs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        double v;
        if (!(ls >> v)) {
            std::string rest;
            ls.clear();
            ls >> rest;
            if (rest.empty()) continue;  // blank line
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number");
        }
        xs.push_back(v);
    }
    if (xs.empty()) throw std::runtime_error(path + ": no samples");
    return xs;
}

void emit(const json& j, const std::string& output) {
    if (output.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(output);
        if (!out) throw std::runtime_error("cannot write " + output);
        out << j.dump(2) << "\n";
    }
}

json estimate_json(const EstimateResult& r, double h, std::size_t n, const std::string& kernel,
                   const std::string& noise) {
    json j;
    j["value_mantissa"] = r.value.mantissa;
    j["value_log_scale"] = r.value.log_scale;
    double lg = r.value.log_abs();
    if (r.value.is_zero() || std::abs(lg) < 700.0) j["value"] = r.value.to_double();
    j["h"] = h;
    j["n"] = n;
    j["kernel"] = kernel;
    j["noise"] = noise;
    j["quadrature_error"] = r.quadrature_error;
    j["representation"] =
        r.representation_used == Representation::cosine_sum ? "cosine_sum" : "direct_fourier";
    if (r.a_used) j["a_used"] = *r.a_used;
    return j;
}

struct SampleSource {
    std::string data_file;
    std::string target_desc = "normal:0,1";
    std::size_t n = 1000;
    std::uint64_t seed = 1;

    Sample load(const NoiseModel& noise) const {
        Sample s;
        if (!data_file.empty()) {
            s.x = read_samples(data_file);
            return s;
        }
        TargetModel target = TargetModel::parse(target_desc);
        std::uint64_t key = rng::derive_key(seed, 0);
        s.x = target.sample(n, rng::derive_key(key, 0));
        std::vector<double> zs = sample_noise(noise, n, rng::derive_key(key, 1));
        for (std::size_t j = 0; j < s.x.size(); ++j) s.x[j] += zs[j];
        return s;
    }
};

void add_sample_opts(CLI::App* cmd, SampleSource& src) {
    cmd->add_option("--data", src.data_file, "sample file, one value per line");
    cmd->add_option("--target", src.target_desc, "target model for generated samples");
    cmd->add_option("--n", src.n, "generated sample size");
    cmd->add_option("--seed", src.seed, "generation seed");
}

ConfigMap load_config(const std::string& path, const std::vector<std::string>& overrides) {
    ConfigMap m = ConfigMap::from_file(path);
    for (const auto& ov : overrides) m.apply_override(ov);
    return m;
}

void emit_qq_plot(const MonteCarloReport& rep, const std::string& path) {
    std::vector<double> sorted = rep.standardized;
    std::sort(sorted.begin(), sorted.end());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(12);
    out << "# normal_quantile sample_quantile  (standardized scale: predicted sd "
        << std::sqrt(rep.predicted_variance) << ")\n";
    std::size_t M = sorted.size();
    for (std::size_t i = 0; i < M; ++i) {
        double p = (static_cast<double>(i) + 0.5) / static_cast<double>(M);
        out << normal_quantile(p) << " " << sorted[i] << "\n";
    }
}

void emit_sweep_plot(const SweepTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(12);
    out << "# h empirical_variance predicted_variance ratio_to_limit\n";
    for (const auto& r : t.rows) {
        out << r.h << " " << r.empirical_variance << " " << r.predicted_variance << " "
            << r.ratio_to_limit << "\n";
    }
}

json classification_json(const ConditionAClass& c) {
    json j;
    const char* names[] = {"A1", "A2", "A3", "unclassified"};
    j["variant"] = names[static_cast<int>(c.variant)];
    if (c.variant == ConditionAVariant::A3) {
        j["gamma"] = c.gamma;
        j["side"] = c.side;
    }
    json rows = json::array();
    for (const auto& r : c.diagnostics) {
        rows.push_back({{"n", r.n},
                        {"u", r.u},
                        {"u_minus", r.u_minus},
                        {"u_plus", r.u_plus},
                        {"q_minus", r.q_minus},
                        {"q_plus", r.q_plus}});
    }
    j["diagnostics"] = std::move(rows);
    return j;
}

BandwidthSchedule schedule_from_flags(const std::string& spec, double width, double lambda,
                                      const std::string& base_desc) {
    ScheduleTarget target;
    if (spec == "A1") {
        target.variant = ConditionAVariant::A1;
    } else if (spec == "A2") {
        target.variant = ConditionAVariant::A2;
    } else if (spec.rfind("A3:", 0) == 0) {
        target.variant = ConditionAVariant::A3;
        target.gamma = std::stod(spec.substr(3));
    } else if (spec == "A3") {
        target.variant = ConditionAVariant::A3;
    } else {
        throw std::invalid_argument("schedule must be A1, A2, or A3[:gamma]");
    }
    std::function<double(double)> base;
    if (base_desc == "sqrtlog") {
        base = [](double n) { return std::sqrt(std::log(n)); };
    } else if (base_desc.rfind("pow:", 0) == 0) {
        double p = std::stod(base_desc.substr(4));
        base = [p](double n) { return std::pow(n, p); };
    } else {
        throw std::invalid_argument("base must be sqrtlog or pow:<p>");
    }
    return make_schedule(target, width, lambda, base, base_desc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel deconvolution estimators, exact oracles, and Monte Carlo checks"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help and exit");

    // --h is the bandwidth everywhere, so no subcommand may claim -h for help
    auto sub = [](CLI::App* parent, const std::string& name, const std::string& desc) {
        CLI::App* c = parent->add_subcommand(name, desc);
        c->set_help_flag("--help", "print help and exit");
        return c;
    };

    std::string kernel_name = "indicator", noise_desc = "normal:1";
    double h = 0.25;

    // ---- estimate ----
    auto* est = sub(&app, "estimate", "evaluate an estimator on samples");
    est->require_subcommand(1);

    SampleSource src;
    double x = 0.0, a = -1.0, b = 1.0, delta = 0.5;
    std::optional<double> explicit_a;
    std::string rep_name = "cosine", output;
    bool have_a = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--kernel", kernel_name, "indicator|poly1|poly2|poly3");
        cmd->add_option("--noise", noise_desc, "normal:s | stable:l,c | cauchy:c | none");
        cmd->add_option("--h", h, "bandwidth")->required();
        cmd->add_option("--representation", rep_name, "cosine|fourier");
        cmd->add_option("--output", output, "write JSON here instead of stdout");
        add_sample_opts(cmd, src);
    };

    auto* est_d = sub(est, "density", "pointwise density estimate");
    add_common(est_d);
    est_d->add_option("--x", x, "evaluation point");

    auto* est_i = sub(est, "interval", "interval probability estimate");
    add_common(est_i);
    est_i->add_option("--a", a, "left endpoint")->required();
    est_i->add_option("--b", b, "right endpoint")->required();

    auto* est_c = sub(est, "cdf", "distribution function estimate");
    add_common(est_c);
    est_c->add_option("--b", b, "evaluation point")->required();
    est_c->add_option("--a", a, "explicit lower cutoff")->each([&](const std::string&) {
        have_a = true;
    });
    est_c->add_option("--delta", delta, "lower-cutoff rule exponent margin");

    // ---- expect ----
    auto* exp_cmd = sub(&app, "expect", "exact expectations and term variances");
    exp_cmd->require_subcommand(1);
    std::string target_desc = "normal:0,1";
    auto add_expect_common = [&](CLI::App* cmd) {
        cmd->add_option("--target", target_desc, "target model")->required();
        cmd->add_option("--kernel", kernel_name, "kernel name");
        cmd->add_option("--noise", noise_desc, "noise model (term variance only)");
        cmd->add_option("--h", h, "bandwidth")->required();
        cmd->add_option("--output", output, "write JSON here instead of stdout");
    };
    auto* exp_d = sub(exp_cmd, "density", "E f_nh(x) and Var of one term");
    add_expect_common(exp_d);
    exp_d->add_option("--x", x, "evaluation point");
    auto* exp_i = sub(exp_cmd, "interval", "E F_nh(a,b) and Var of one term");
    add_expect_common(exp_i);
    exp_i->add_option("--a", a)->required();
    exp_i->add_option("--b", b)->required();

    // ---- asym ----
    auto* asym = sub(&app, "asym", "limit laws, lattice classification, endpoint expansions");
    asym->require_subcommand(1);

    std::string theorem_name = "T1", schedule_spec = "A1", base_desc = "sqrtlog";
    double width = M_PI, lambda_opt = 2.0, gamma_val = 1.0, tol = 0.05;
    double eps = 0.0, beta = 0.0, mu = 2.0, lambda0 = 0.0;
    std::vector<double> probes = {1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
    std::vector<double> indices;
    std::optional<double> law_n, law_h, law_x, law_a, law_b, law_gamma;

    auto* asym_law = sub(asym, "law", "normalizer and limit variance for a theorem id");
    asym_law->add_option("--theorem", theorem_name, "T1..T7")->required();
    asym_law->add_option("--kernel", kernel_name);
    asym_law->add_option("--noise", noise_desc);
    asym_law->add_option("--target", target_desc, "target model (T7 variance quadrature)");
    asym_law->add_option("--x", [&law_x](auto& v) { law_x = std::stod(v[0]); return true; }, "evaluation point");
    asym_law->add_option("--a", [&law_a](auto& v) { law_a = std::stod(v[0]); return true; }, "left endpoint");
    asym_law->add_option("--b", [&law_b](auto& v) { law_b = std::stod(v[0]); return true; }, "right endpoint");
    asym_law->add_option("--gamma", [&law_gamma](auto& v) { law_gamma = std::stod(v[0]); return true; },
                         "critical drift constant");
    asym_law->add_option("--n", [&law_n](auto& v) { law_n = std::stod(v[0]); return true; },
                         "sample size for a normalizer evaluation");
    asym_law->add_option("--h", [&law_h](auto& v) { law_h = std::stod(v[0]); return true; },
                         "bandwidth for a normalizer evaluation");
    asym_law->add_option("--output", output);

    auto* asym_cls = sub(asym, "classify", "classify a bandwidth schedule");
    asym_cls->add_option("--schedule", schedule_spec, "A1|A2|A3:<gamma>")->required();
    asym_cls->add_option("--width", width, "interval width b-a")->required();
    asym_cls->add_option("--lambda", lambda_opt, "noise decay exponent");
    asym_cls->add_option("--base", base_desc, "sqrtlog|pow:<p>");
    asym_cls->add_option("--tol", tol, "classification tolerance");
    asym_cls->add_option("--probes", probes, "probe indices")->expected(-3);
    asym_cls->add_option("--output", output);

    auto* asym_sched = sub(asym, "schedule", "print bandwidths along a schedule");
    asym_sched->add_option("--schedule", schedule_spec, "A1|A2|A3:<gamma>")->required();
    asym_sched->add_option("--width", width)->required();
    asym_sched->add_option("--lambda", lambda_opt);
    asym_sched->add_option("--base", base_desc);
    asym_sched->add_option("--indices", indices, "indices n to evaluate at")->expected(-1);
    asym_sched->add_option("--output", output);

    auto* asym_lap = sub(asym, "laplace", "endpoint expansion vs exact quadrature");
    asym_lap->add_option("--kernel", kernel_name);
    asym_lap->add_option("--eps", eps, "lower limit of the s-integral");
    asym_lap->add_option("--beta", beta, "power of (1-s)");
    asym_lap->add_option("--lambda", lambda_opt, "decay exponent");
    asym_lap->add_option("--mu", mu, "decay scale");
    asym_lap->add_option("--lambda0", lambda0, "power of s^-1");
    asym_lap->add_option("--h", h, "bandwidth")->required();
    asym_lap->add_option("--output", output);

    // ---- mc / sweep ----
    std::string config_path, format = "json", plot_path;
    std::vector<std::string> overrides;
    std::vector<double> sweep_h;

    auto* mc = sub(&app, "mc", "run a Monte Carlo experiment from a config file");
    mc->add_option("--config", config_path, "flat key=value config")->required();
    mc->add_option("--override", overrides, "key=value overrides")->expected(-1);
    mc->add_option("--output", output, "report path (default from config, else stdout)");
    mc->add_option("--format", format, "json|csv");
    mc->add_option("--emit-plot-data", plot_path, "write normal QQ columns here");

    auto* sweep = sub(&app, "sweep", "repeat an experiment across bandwidths");
    sweep->add_option("--config", config_path, "flat key=value config")->required();
    sweep->add_option("--override", overrides, "key=value overrides")->expected(-1);
    sweep->add_option("--h-values", sweep_h, "bandwidths (at least three)")->required()->expected(-3);
    sweep->add_option("--output", output, "sweep table path (default stdout)");
    sweep->add_option("--emit-plot-data", plot_path, "write h-vs-variance columns here");

    CLI11_PARSE(app, argc, argv);

    try {
        QuadratureSpec quad;
        if (est->parsed()) {
            NoiseModel noise = NoiseModel::parse(noise_desc);
            KernelSpec kernel = builtin_kernel(kernel_name);
            Sample s = src.load(noise);
            Representation rep = rep_name == "fourier" ? Representation::direct_fourier
                                                       : Representation::cosine_sum;
            EstimateResult r;
            if (est_d->parsed()) {
                r = estimate_density(s, kernel, noise, h, x, quad, rep);
            } else if (est_i->parsed()) {
                r = estimate_interval(s, kernel, noise, h, a, b, quad, rep);
            } else {
                CdfLowerRule rule;
                if (have_a) rule.explicit_a = a;
                rule.delta = delta;
                r = estimate_cdf(s, kernel, noise, h, b, rule, quad);
            }
            emit(estimate_json(r, h, s.n(), kernel_name, noise_desc), output);
        } else if (exp_cmd->parsed()) {
            TargetModel target = TargetModel::parse(target_desc);
            NoiseModel noise = NoiseModel::parse(noise_desc);
            KernelSpec kernel = builtin_kernel(kernel_name);
            json j;
            if (exp_d->parsed()) {
                j["expected"] = expected_density(target, kernel, h, x, quad);
                ScaledValue tv = exact_term_variance(target, noise, kernel, h, x, quad);
                j["term_variance_log"] = tv.log_abs();
                if (std::abs(tv.log_abs()) < 700.0) j["term_variance"] = tv.to_double();
            } else {
                j["expected"] = expected_interval(target, kernel, h, a, b, quad);
                ScaledValue tv = exact_interval_term_variance(target, noise, kernel, h, a, b, quad);
                j["term_variance_log"] = tv.log_abs();
                if (std::abs(tv.log_abs()) < 700.0) j["term_variance"] = tv.to_double();
            }
            j["h"] = h;
            j["kernel"] = kernel_name;
            j["noise"] = noise_desc;
            j["target"] = target_desc;
            emit(j, output);
        } else if (asym_law->parsed()) {
            KernelSpec kernel = builtin_kernel(kernel_name);
            NoiseModel noise = NoiseModel::parse(noise_desc);
            TargetModel target = TargetModel::parse(target_desc);
            LimitLawExtras extras;
            extras.x = law_x;
            extras.a = law_a;
            extras.b = law_b;
            extras.gamma = law_gamma;
            extras.target = &target;
            extras.quad = quad;
            LimitLaw law = limit_law(theorem_from_string(theorem_name), kernel, noise, extras);
            json j;
            j["theorem"] = theorem_to_string(law.theorem_id);
            j["limit_mean"] = law.limit_mean;
            j["limit_variance"] = law.limit_variance;
            if (!law.note.empty()) j["note"] = law.note;
            if (law_n && law_h) {
                ScaledValue nv = law.normalizer(*law_n, *law_h);
                j["normalizer_log"] = nv.log_abs();
                if (std::abs(nv.log_abs()) < 700.0) j["normalizer"] = nv.to_double();
            }
            emit(j, output);
        } else if (asym_cls->parsed()) {
            auto sched = schedule_from_flags(schedule_spec, width, lambda_opt, base_desc);
            auto cls = classify_condition_a(sched, lambda_opt, probes, tol);
            json j = classification_json(cls);
            j["schedule"] = sched.description;
            emit(j, output);
        } else if (asym_sched->parsed()) {
            auto sched = schedule_from_flags(schedule_spec, width, lambda_opt, base_desc);
            if (indices.empty()) indices = probes;
            json rows = json::array();
            for (double n : indices) {
                json row = {{"n", n}, {"h", sched.rule(n)}, {"u", 1.0 / (2.0 * sched.rule(n))}};
                if (sched.parity) row["parity"] = sched.parity(n);
                rows.push_back(std::move(row));
            }
            json j;
            j["schedule"] = sched.description;
            j["rows"] = std::move(rows);
            emit(j, output);
        } else if (asym_lap->parsed()) {
            KernelSpec kernel = builtin_kernel(kernel_name);
            ScaledValue ex = laplace_exact(kernel, eps, beta, lambda_opt, mu, lambda0, h, quad);
            ScaledValue as = laplace_asymptotic(kernel, eps, beta, lambda_opt, mu, lambda0, h);
            json j;
            j["exact_log"] = ex.log_abs();
            j["asymptotic_log"] = as.log_abs();
            j["ratio"] = scaled_ratio(ex, as);
            j["h"] = h;
            emit(j, output);
        } else if (mc->parsed()) {
            ConfigMap m = load_config(config_path, overrides);
            ExperimentConfig cfg = ExperimentConfig::from_map(m);
            MonteCarloReport rep = run_experiment(cfg);
            std::string out_path = output.empty() ? m.get_string("output", "") : output;
            std::string fmt = format.empty() ? m.get_string("format", "json") : format;
            if (mc->count("--format") == 0 && m.has("format")) fmt = m.get_string("format");
            if (out_path.empty()) {
                std::cout << report_to_json(rep) << "\n";
            } else if (fmt == "csv") {
                write_report_csv(rep, out_path);
            } else {
                write_report_json(rep, out_path);
            }
            if (!plot_path.empty()) emit_qq_plot(rep, plot_path);
            std::cerr << "statistic " << rep.statistic << ": predicted var " << rep.predicted_variance
                      << ", empirical var " << rep.empirical_variance << ", KS p " << rep.ks_p_value
                      << ", " << rep.wall_seconds << "s\n";
        } else if (sweep->parsed()) {
            ConfigMap m = load_config(config_path, overrides);
            ExperimentConfig cfg = ExperimentConfig::from_map(m);
            SweepTable table = rate_sweep(cfg, sweep_h);
            if (output.empty()) {
                std::cout << sweep_to_json(table) << "\n";
            } else {
                write_sweep_json(table, output);
            }
            if (!plot_path.empty()) emit_sweep_plot(table, plot_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
