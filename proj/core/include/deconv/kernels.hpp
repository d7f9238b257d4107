#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deconv/quadrature.hpp"

namespace deconv {

// Fourier-domain kernel: phi_w is symmetric, supported on [-1,1], with edge
// behavior phi_w(1-t) ~ A t^alpha as t -> 0. A and alpha drive every limit
// constant downstream.
struct KernelSpec {
    std::string name;
    std::function<double(double)> phi_w;
    double A = 1.0;
    double alpha = 0.0;
    std::function<double(double)> closed_form_w;  // may be empty
};

// Registry: "indicator" plus "poly1".."poly3" with phi_w(t) = (1-t^2)^m.
const KernelSpec& builtin_kernel(const std::string& name);
std::vector<std::string> builtin_kernel_names();

double phi_w_eval(const KernelSpec& k, double t);

struct WParamsFit {
    double A;
    double alpha;
    double fit_residual;  // max |log phi_w(1-t) - fitted| over the probe grid
};

// Recovers (A, alpha) by regressing log phi_w(1-t) on log t, t in [1e-4, 1e-2].
WParamsFit condition_w_params(const KernelSpec& k);

// w(x) = (1/pi) * integral_0^1 cos(s x) phi_w(s) ds, or the closed form if present.
double kernel_w_eval(const KernelSpec& k, double x, const QuadratureSpec& spec);

}  // namespace deconv
