#include "deconv/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace deconv {

namespace {

double poly_phi(double t, int m) {
    if (std::fabs(t) > 1.0) return 0.0;
    double base = 1.0 - t * t;
    double v = base;
    for (int i = 1; i < m; ++i) v *= base;
    return v;
}

std::vector<KernelSpec> make_builtins() {
    std::vector<KernelSpec> ks;
    KernelSpec ind;
    ind.name = "indicator";
    ind.phi_w = [](double t) { return std::fabs(t) <= 1.0 ? 1.0 : 0.0; };
    ind.A = 1.0;
    ind.alpha = 0.0;
    ind.closed_form_w = [](double x) {
        if (std::fabs(x) < 1e-8) return (1.0 - x * x / 6.0) / M_PI;
        return std::sin(x) / (M_PI * x);
    };
    ks.push_back(std::move(ind));
    for (int m = 1; m <= 3; ++m) {
        KernelSpec k;
        k.name = "poly" + std::to_string(m);
        k.phi_w = [m](double t) { return poly_phi(t, m); };
        k.A = std::pow(2.0, m);
        k.alpha = static_cast<double>(m);
        ks.push_back(std::move(k));
    }
    return ks;
}

const std::vector<KernelSpec>& builtins() {
    static const std::vector<KernelSpec> ks = make_builtins();
    return ks;
}

}  // namespace

const KernelSpec& builtin_kernel(const std::string& name) {
    for (const auto& k : builtins()) {
        if (k.name == name) return k;
    }
    throw std::invalid_argument("builtin_kernel: unknown kernel '" + name + "'");
}

std::vector<std::string> builtin_kernel_names() {
    std::vector<std::string> names;
    for (const auto& k : builtins()) names.push_back(k.name);
    return names;
}

double phi_w_eval(const KernelSpec& k, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("phi_w_eval: non-finite t");
    if (std::fabs(t) > 1.0) return 0.0;
    return k.phi_w(t);
}

WParamsFit condition_w_params(const KernelSpec& k) {
    // log-spaced probe grid on [1e-4, 1e-2]
    const int npts = 25;
    std::vector<double> lt(npts), lphi(npts);
    for (int i = 0; i < npts; ++i) {
        double t = std::pow(10.0, -4.0 + 2.0 * i / (npts - 1));
        double p = k.phi_w(1.0 - t);
        if (!(p > 0.0)) {
            throw std::domain_error("condition_w_params: phi_w(1-t) not positive on probe grid");
        }
        lt[i] = std::log(t);
        lphi[i] = std::log(p);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < npts; ++i) {
        sx += lt[i];
        sy += lphi[i];
        sxx += lt[i] * lt[i];
        sxy += lt[i] * lphi[i];
    }
    double slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    double intercept = (sy - slope * sx) / npts;
    double resid = 0.0;
    for (int i = 0; i < npts; ++i) {
        resid = std::max(resid, std::fabs(lphi[i] - (intercept + slope * lt[i])));
    }
    return {std::exp(intercept), slope, resid};
}

double kernel_w_eval(const KernelSpec& k, double x, const QuadratureSpec& spec) {
    if (k.closed_form_w) return k.closed_form_w(x);
    ScaledIntegrand f;
    f.amplitude = [&k, x](double s) { return std::cos(s * x) * k.phi_w(s); };
    f.frequency = std::fabs(x);
    QuadratureSpec sp = spec;
    sp.panel_strategy = PanelStrategy::uniform;
    return integrate_scaled(f, 0.0, 1.0, sp).to_double() / M_PI;
}

}  // namespace deconv
