#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "deconv/quadrature.hpp"

namespace deconv {

// Error distribution. Built-ins all have exactly
// phi_k(t) = C |t|^{lambda0} e^{-|t|^lambda / mu} with C = 1, lambda0 = 0,
// so the tail constants below are exact rather than asymptotic.
class NoiseModel {
public:
    enum class Family { normal, stable, cauchy, none };

    struct ConditionK {
        double C = 1.0;
        double lambda0 = 0.0;
        double lambda = 2.0;
        double mu = 2.0;
    };

    static NoiseModel normal(double sigma);
    static NoiseModel stable(double lambda, double c);
    static NoiseModel cauchy(double c);
    // phi_k identically 1; only used to exercise noiseless reductions in tests
    static NoiseModel noise_free();
    // "normal:sigma" | "stable:lambda,c" | "cauchy:c"
    static NoiseModel parse(const std::string& text);

    Family family() const { return family_; }
    double scale() const { return scale_; }
    const ConditionK& condition_k() const { return ck_; }
    bool is_noise_free() const { return family_ == Family::none; }
    std::string describe() const;

    double phi_k(double t) const;
    double log_phi_k(double t) const;

    double density(double z) const;
    double cdf(double z) const;
    // |z| beyond which density() switches from its interpolation grid to the
    // power-law tail formula; 0 for closed-form densities. Quadrature against
    // the density should place a panel boundary there.
    double density_grid_radius() const;

private:
    NoiseModel() = default;
    struct StableCache;
    const StableCache& stable_cache() const;

    Family family_ = Family::none;
    double scale_ = 1.0;   // sigma for normal, c otherwise
    ConditionK ck_{1.0, 0.0, 2.0, 2.0};
    mutable std::shared_ptr<StableCache> cache_;
};

std::vector<double> sample_noise(const NoiseModel& m, std::size_t n, std::uint64_t seed);

class TargetModel {
public:
    enum class Family { normal, mixture, uniform };

    static TargetModel normal(double mean, double sd);
    static TargetModel mixture(std::vector<double> weights, std::vector<double> means,
                               std::vector<double> sds);
    static TargetModel uniform(double lo, double hi);
    // "normal:m,s" | "mix:w1,m1,s1,..." | "uniform:lo,hi"
    static TargetModel parse(const std::string& text);

    Family family() const { return family_; }
    std::string describe() const;

    double density(double y) const;
    double cdf(double y) const;
    std::complex<double> char_fn(double t) const;
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    double mean() const;
    // half-width of the region carrying essentially all mass; quadrature hint
    double spread() const;

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& sds() const { return sds_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    TargetModel() = default;
    Family family_ = Family::normal;
    std::vector<double> weights_, means_, sds_;
    double lo_ = 0.0, hi_ = 1.0;
};

// Density of X = Y + Z at u. Closed forms for normal/mixture/uniform targets
// under normal noise; Fourier inversion (1/pi) Int_0^inf Re[e^{-itu} phi_f(t)]
// phi_k(t) dt otherwise.
double convolved_density(const TargetModel& f, const NoiseModel& m, double u,
                         const QuadratureSpec& spec);

}  // namespace deconv
