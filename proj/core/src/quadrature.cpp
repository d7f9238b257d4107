#include "deconv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace deconv {

namespace {

GlRule compute_gl(int n) {
    GlRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence for P_n and its derivative
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    return r;
}

std::mutex gl_mutex;
std::map<int, GlRule> gl_cache;

// round a node requirement up to a cached rule size
int ladder(int req) {
    static const int sizes[] = {8, 16, 24, 32, 48, 64, 96, 128, 192, 256};
    for (int s : sizes)
        if (req <= s) return s;
    return 256;
}

struct Panel {
    double lo, hi;
    int nodes;
};

int osc_requirement(int node_count, double frequency, double width) {
    double extra = 0.75 * frequency * width;
    if (extra > 1e9) extra = 1e9;
    return node_count + static_cast<int>(std::ceil(extra));
}

}  // namespace

const GlRule& gauss_legendre(int n) {
    if (n < 2) throw std::invalid_argument("gauss_legendre: n < 2");
    std::lock_guard<std::mutex> lock(gl_mutex);
    auto it = gl_cache.find(n);
    if (it == gl_cache.end()) it = gl_cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

std::vector<QuadNode> build_quad_nodes(double lo, double hi, const QuadratureSpec& spec,
                                       double frequency, int peak_side, int refinement,
                                       bool refine_lo) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("build_quad_nodes: bad domain");
    }
    if (spec.node_count < 2) throw std::invalid_argument("build_quad_nodes: node_count < 2");

    double width = hi - lo;
    std::vector<double> edges;
    if (spec.panel_strategy == PanelStrategy::uniform) {
        int m = 4;
        for (int i = 0; i <= m; ++i) edges.push_back(lo + width * i / m);
    } else {
        int levels = std::max(4, spec.geometric_levels);
        edges.push_back(lo);
        if (peak_side >= 0) {
            for (int j = levels; j >= 1; --j) edges.push_back(hi - width * std::ldexp(1.0, -j));
        } else {
            for (int j = 1; j <= levels; ++j) edges.push_back(lo + width * std::ldexp(1.0, -j));
        }
        edges.push_back(hi);
        std::sort(edges.begin(), edges.end());
    }
    // drop degenerate panels from the ldexp ladder bottoming out
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    if (refine_lo && edges.size() >= 2 && edges[0] == lo) {
        // subdivide the first panel geometrically toward lo as well
        double e = edges[1];
        std::vector<double> extra;
        for (int j = 1; j <= 50; ++j) {
            double p = lo + (e - lo) * std::ldexp(1.0, -j);
            if (p > lo) extra.push_back(p);
        }
        edges.insert(edges.end(), extra.begin(), extra.end());
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }

    // split panels whose oscillation budget would exceed the ladder, then
    // apply the refinement level: r=0 base nodes, r=1 doubled nodes,
    // r>=2 additionally splits each panel into 2^(r-1) parts
    int parts_mult = refinement >= 2 ? (1 << (refinement - 1)) : 1;
    std::vector<Panel> panels;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        double a = edges[i], b = edges[i + 1];
        int req = osc_requirement(spec.node_count, frequency, b - a);
        int split = std::max(1, (req + 31) / 32) * parts_mult;
        if (split > 4096) split = 4096;
        for (int k = 0; k < split; ++k) {
            double pa = a + (b - a) * k / split;
            double pb = a + (b - a) * (k + 1) / split;
            int preq = osc_requirement(spec.node_count, frequency, pb - pa);
            if (refinement >= 1) preq *= 2;
            panels.push_back({pa, pb, ladder(preq)});
        }
    }

    std::vector<QuadNode> nodes;
    nodes.reserve(panels.size() * static_cast<size_t>(spec.node_count));
    for (const Panel& p : panels) {
        const GlRule& rule = gauss_legendre(p.nodes);
        double mid = 0.5 * (p.lo + p.hi), half = 0.5 * (p.hi - p.lo);
        for (int i = 0; i < p.nodes; ++i) {
            nodes.push_back({mid + half * rule.x[i], half * rule.w[i]});
        }
    }
    return nodes;
}

namespace {

struct PassResult {
    ScaledValue value;
    ScaledValue abs_mass;  // integral of |amplitude|*e^{log_weight}
};

PassResult eval_pass(const ScaledIntegrand& f, const std::vector<QuadNode>& nodes) {
    double acc = 0.0, abs_acc = 0.0;
    double max_lw = 0.0;
    bool have_lw = false;
    for (const QuadNode& nd : nodes) {
        double a = f.amplitude(nd.s);
        double lw = f.log_weight ? f.log_weight(nd.s) : 0.0;
        if (!std::isfinite(a) || !std::isfinite(lw)) {
            throw std::invalid_argument("integrate_scaled: non-finite integrand at s=" +
                                        std::to_string(nd.s));
        }
        if (!have_lw) {
            max_lw = lw;
            have_lw = true;
        } else if (lw > max_lw) {
            double resc = std::exp(max_lw - lw);
            acc *= resc;
            abs_acc *= resc;
            max_lw = lw;
        }
        double c = a * nd.w * std::exp(lw - max_lw);
        acc += c;
        abs_acc += std::fabs(c);
    }
    PassResult r;
    r.value = (!have_lw || acc == 0.0) ? ScaledValue{0.0, 0.0}
                                       : scaled_normalize({acc, max_lw});
    r.abs_mass = (!have_lw || abs_acc == 0.0) ? ScaledValue{0.0, 0.0}
                                              : scaled_normalize({abs_acc, max_lw});
    return r;
}

}  // namespace

ScaledValue integrate_scaled(const ScaledIntegrand& f, double lo, double hi,
                             const QuadratureSpec& spec, double* err_out) {
    if (!(lo < hi)) throw std::invalid_argument("integrate_scaled: requires lo < hi");
    if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) {
        throw std::invalid_argument("integrate_scaled: tolerances must be positive");
    }

    int peak_side = 1;
    if (f.peak_side != 0) {
        peak_side = f.peak_side;
    } else if (spec.panel_strategy == PanelStrategy::geometric_toward_endpoint && f.log_weight) {
        peak_side = (f.log_weight(hi) >= f.log_weight(lo)) ? 1 : -1;
    }

    ScaledValue prev{0.0, 0.0};
    bool have_prev = false;
    double best_err = std::numeric_limits<double>::infinity();
    ScaledValue best{0.0, 0.0};
    int max_r = std::max(1, spec.max_refinements);
    for (int r = 0; r <= max_r; ++r) {
        auto nodes = build_quad_nodes(lo, hi, spec, f.frequency, peak_side, r, f.refine_lo);
        PassResult cur = eval_pass(f, nodes);
        if (have_prev) {
            ScaledValue diff = scaled_sub(cur.value, prev);
            if (diff.is_zero()) {
                if (err_out) *err_out = 0.0;
                return cur.value;
            }
            double dlog = diff.log_abs();
            // relative error, or absolute on the mantissa when the signed
            // result is small against the total mass (oscillatory cancellation)
            double rel = cur.value.is_zero()
                             ? 1.0
                             : std::exp(std::min(dlog - cur.value.log_abs(), 0.0));
            double vs_mass = cur.abs_mass.is_zero()
                                 ? 0.0
                                 : std::exp(dlog - cur.abs_mass.log_abs());
            double abs_mant = std::exp(dlog - cur.abs_mass.log_scale);
            double err = std::min(rel, vs_mass);
            if (rel <= spec.rel_tol || vs_mass <= spec.rel_tol || abs_mant <= spec.abs_tol) {
                if (err_out) *err_out = err;
                return cur.value;
            }
            if (err < best_err) {
                best_err = err;
                best = cur.value;
            }
        }
        prev = cur.value;
        have_prev = true;
    }
    throw quadrature_error("integrate_scaled: tolerance not reached", best, best_err);
}

}  // namespace deconv
