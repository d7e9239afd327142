#pragma once

// Natural-frequency densities g(omega): evaluation on the real line and in the
// analyticity strip, derivatives up to order 2, Hilbert transform H[g](y) =
// -(1/pi) p.v. Integral g(w+y)/w dw, CDF/quantile, and frequency sampling.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "kdaido/errors.hpp"
#include "kdaido/faddeeva.hpp"
#include "kdaido/quadrature.hpp"

namespace kdaido {

inline constexpr double kd_pi = 3.141592653589793238462643383279503;

enum class density_kind { lorentzian, gaussian, lorentzian_mixture };

struct mixture_component {
    double weight;
    double center;
    double gamma;
};

// How sample() draws frequencies: deterministic quantile midpoints Q((i-1/2)/n)
// or reproducible pseudo-random quantile-transformed draws.
struct sample_scheme {
    enum class kind { quantile_midpoint, seeded } tag;
    std::uint64_t seed = 0;
    static sample_scheme quantile_midpoint() { return {kind::quantile_midpoint, 0}; }
    static sample_scheme seeded(std::uint64_t s) { return {kind::seeded, s}; }
};

class density {
  public:
    static density lorentzian(double gamma) {
        if (!(gamma > 0.0)) throw config_error("lorentzian requires gamma > 0");
        density d;
        d.kind_ = density_kind::lorentzian;
        d.comps_ = {{1.0, 0.0, gamma}};
        return d;
    }

    static density gaussian(double sigma) {
        if (!(sigma > 0.0)) throw config_error("gaussian requires sigma > 0");
        density d;
        d.kind_ = density_kind::gaussian;
        d.sigma_ = sigma;
        return d;
    }

    static density lorentzian_mixture(std::vector<mixture_component> comps) {
        if (comps.empty()) throw config_error("mixture requires at least one component");
        double wsum = 0.0;
        for (const auto& c : comps) {
            // positive weights and genuine widths keep the continuation analytic
            if (!(c.weight > 0.0)) throw config_error("mixture weights must be positive");
            if (!(c.gamma > 0.0)) throw config_error("mixture widths must be positive");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-12) throw config_error("mixture weights must sum to 1");
        density d;
        d.kind_ = density_kind::lorentzian_mixture;
        d.comps_ = std::move(comps);
        return d;
    }

    density_kind kind() const { return kind_; }
    double gamma() const { return comps_.front().gamma; }
    double sigma() const { return sigma_; }
    const std::vector<mixture_component>& components() const { return comps_; }

    // half-width of the strip |Im z| < delta of guaranteed analyticity
    double strip_half_width() const {
        if (kind_ == density_kind::gaussian) return 10.0 * sigma_;
        double gmin = comps_.front().gamma;
        for (const auto& c : comps_) gmin = std::min(gmin, c.gamma);
        return 0.9 * gmin;
    }

    // characteristic frequency width, used for search windows and tan maps
    double scale() const {
        if (kind_ == density_kind::gaussian) return sigma_;
        double s = 0.0;
        for (const auto& c : comps_) s = std::max(s, std::abs(c.center) + c.gamma);
        return s;
    }

    double operator()(double omega) const { return derivative_at(std::complex<double>(omega, 0.0), 0).real(); }

    double derivative(double omega, int n) const {
        return derivative_at(std::complex<double>(omega, 0.0), n).real();
    }

    std::complex<double> eval(std::complex<double> z) const { return derivative(z, 0); }

    std::complex<double> derivative(std::complex<double> z, int n) const {
        if (std::abs(z.imag()) >= strip_half_width())
            throw strip_violation("argument outside the analyticity strip");
        return derivative_at(z, n);
    }

    // H[g](y); closed form for the Lorentzian, symmetric p.v. quadrature of the
    // difference quotient otherwise (also the oracle for every closed form)
    double hilbert(double y) const {
        if (kind_ == density_kind::lorentzian) {
            const double g = comps_.front().gamma;
            return y / (kd_pi * (y * y + g * g));
        }
        const auto f = [this](double w) { return (*this)(w); };
        return quad::hilbert_pv(f, y, scale(), 1e-12, 1e-12);
    }

    // d^n H[g]/dy^n, n <= 2, via closed forms (rational for Lorentzian shapes,
    // Faddeeva for the Gaussian)
    double hilbert_derivative(double y, int n) const {
        if (n < 0 || n > 2) throw config_error("hilbert_derivative supports n <= 2");
        if (kind_ == density_kind::gaussian) {
            // H(y) = Im w(x) / (sqrt(2 pi) sigma), x = y / (sqrt(2) sigma)
            const double c = 1.0 / (std::sqrt(2.0) * sigma_);
            const std::complex<double> x(y * c, 0.0);
            const std::complex<double> w = faddeeva_w(x);
            std::complex<double> dn = w;
            if (n >= 1) dn = faddeeva_w_prime(x);
            if (n == 2) dn = (4.0 * x * x - 2.0) * w - std::complex<double>(0.0, 4.0 / std::sqrt(kd_pi)) * x;
            return std::pow(c, n) * dn.imag() / (std::sqrt(2.0 * kd_pi) * sigma_);
        }
        double acc = 0.0;
        for (const auto& cmp : comps_) {
            const double u = y - cmp.center, g = cmp.gamma;
            const double q = u * u + g * g;
            double t = 0.0;
            if (n == 0) t = u / (kd_pi * q);
            if (n == 1) t = (g * g - u * u) / (kd_pi * q * q);
            if (n == 2) t = 2.0 * u * (u * u - 3.0 * g * g) / (kd_pi * q * q * q);
            acc += cmp.weight * t;
        }
        return acc;
    }

    double cdf(double omega) const {
        if (kind_ == density_kind::gaussian)
            return 0.5 * std::erfc(-omega / (std::sqrt(2.0) * sigma_));
        double acc = 0.0;
        for (const auto& c : comps_)
            acc += c.weight * (0.5 + std::atan((omega - c.center) / c.gamma) / kd_pi);
        return acc;
    }

    // inverse CDF; closed form for the plain Lorentzian, bisection + Newton
    // polish (tolerance 1e-12 * scale) otherwise
    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0)) throw config_error("quantile requires p in (0, 1)");
        if (kind_ == density_kind::lorentzian)
            return comps_.front().gamma * std::tan(kd_pi * (p - 0.5));
        double lo = -scale(), hi = scale();
        while (cdf(lo) > p) lo *= 2.0;
        while (cdf(hi) < p) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (cdf(mid) < p ? lo : hi) = mid;
        }
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 8; ++it) {
            const double gx = (*this)(x);
            if (gx <= 0.0) break;
            const double step = (cdf(x) - p) / gx;
            x -= step;
            if (std::abs(step) < 1e-12 * std::max(1.0, scale())) break;
        }
        return x;
    }

    std::vector<double> sample(int n, sample_scheme scheme) const {
        if (n < 1) throw config_error("sample requires n >= 1");
        std::vector<double> out(n);
        if (scheme.tag == sample_scheme::kind::quantile_midpoint) {
            for (int i = 0; i < n; ++i) out[i] = quantile((i + 0.5) / n);
            return out;
        }
        std::mt19937_64 rng(scheme.seed);
        for (int i = 0; i < n; ++i) {
            // 53-bit mantissa shifted into the open interval (0, 1)
            const double u = ((rng() >> 11) + 0.5) * 0x1.0p-53;
            out[i] = quantile(u);
        }
        return out;
    }

  private:
    // g^(n)(z) without the strip guard; Lorentzian shapes are rational,
    // the Gaussian is entire
    std::complex<double> derivative_at(std::complex<double> z, int n) const {
        if (n < 0 || n > 2) throw config_error("density derivative supports n <= 2");
        using cplx = std::complex<double>;
        if (kind_ == density_kind::gaussian) {
            const double s2 = sigma_ * sigma_;
            const cplx g = std::exp(-z * z / (2.0 * s2)) / (std::sqrt(2.0 * kd_pi) * sigma_);
            if (n == 0) return g;
            if (n == 1) return -z / s2 * g;
            return (z * z / (s2 * s2) - 1.0 / s2) * g;
        }
        cplx acc = 0.0;
        for (const auto& c : comps_) {
            const cplx u = z - c.center;
            const double g = c.gamma;
            const cplx q = u * u + g * g;
            cplx t;
            if (n == 0) t = g / (kd_pi * q);
            if (n == 1) t = -2.0 * g * u / (kd_pi * q * q);
            if (n == 2) t = 2.0 * g * (3.0 * u * u - g * g) / (kd_pi * q * q * q);
            acc += c.weight * t;
        }
        return acc;
    }

    density_kind kind_ = density_kind::lorentzian;
    double sigma_ = 0.0;
    std::vector<mixture_component> comps_;
};

}  // namespace kdaido
