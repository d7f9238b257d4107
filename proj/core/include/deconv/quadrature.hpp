#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deconv/scaled.hpp"

namespace deconv {

enum class PanelStrategy {
    uniform,
    // panels shrink geometrically toward the endpoint where log_weight peaks
    geometric_toward_endpoint,
};

struct QuadratureSpec {
    int node_count = 16;
    PanelStrategy panel_strategy = PanelStrategy::geometric_toward_endpoint;
    double abs_tol = 1e-12;  // on the scaled mantissa
    double rel_tol = 1e-9;
    int max_refinements = 5;
    int geometric_levels = 40;
    // integrals whose log-scale would exceed this raise a range error upstream
    double max_log_scale = 1e6;
};

// Integrand factored as amplitude(s) * e^{log_weight(s)} so the huge
// exponential part never materializes as a double. frequency is a hint for
// the dominant oscillation rate of amplitude (radians per unit s) and only
// affects node budgets.
struct ScaledIntegrand {
    std::function<double(double)> amplitude;
    std::function<double(double)> log_weight;  // may be null, meaning 0
    double frequency = 0.0;
    // subdivide toward lo as well (integrable endpoint singularity in amplitude)
    bool refine_lo = false;
    // -1 / +1 pins the panel-clustering endpoint; 0 probes log_weight
    int peak_side = 0;
};

class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& msg, ScaledValue best, double err)
        : std::runtime_error(msg), best_estimate(best), error_bound(err) {}
    ScaledValue best_estimate;
    double error_bound;
};

// Composite Gauss-Legendre over [lo, hi]. Throws quadrature_error if the
// refinement ladder does not reach the requested tolerance. The achieved
// error estimate (relative, or absolute on the mantissa when the result is
// near zero) is written to err_out when non-null.
ScaledValue integrate_scaled(const ScaledIntegrand& f, double lo, double hi,
                             const QuadratureSpec& spec, double* err_out = nullptr);

struct QuadNode {
    double s;
    double w;  // Gauss-Legendre weight times panel half-width
};

// Node layout used by integrate_scaled at a given refinement level, exposed
// so callers can reuse the exact same discretization for batched evaluation.
// peak_side: +1 peak at hi, -1 peak at lo (geometric strategy only).
std::vector<QuadNode> build_quad_nodes(double lo, double hi, const QuadratureSpec& spec,
                                       double frequency, int peak_side, int refinement,
                                       bool refine_lo = false);

struct GlRule {
    std::vector<double> x;  // nodes on (-1, 1)
    std::vector<double> w;
};

const GlRule& gauss_legendre(int n);

}  // namespace deconv
