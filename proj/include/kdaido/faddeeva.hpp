#pragma once

// Faddeeva function w(z) = exp(-z^2) erfc(-iz), self-contained double-precision
// implementation.  Three ingredients:
//   * modified midpoint rule for the Cauchy-type integral representation with an
//     explicit pole-correction term (uniformly accurate for 0 <= Im z < pi/h),
//   * Laplace continued fraction for the far field,
//   * one Taylor step of the defining ODE to reach points within 0.25 of the
//     real axis (stepping toward the axis, where the homogeneous mode decays).
// Lower half-plane via the reflection w(z) = 2 exp(-z^2) - w(-z).

#include <cmath>
#include <complex>

namespace kdaido {

namespace detail_w {

using cplx = std::complex<double>;

inline constexpr double inv_sqrt_pi = 0.5641895835477562869480794515607726;

// Backward Laplace continued fraction w = (i/sqrt(pi)) / (z - 1/2/(z - 1/(z - 3/2/(...)))).
// Reliable outside the ellipse (|x|/6.3)^2 + (y/4.4)^2 = 1 (we call it well outside).
inline cplx continued_fraction(cplx z, int terms = 40) {
    cplx s = 0.0;
    for (int k = terms; k >= 1; --k) s = (0.5 * k) / (z - s);
    return cplx(0.0, inv_sqrt_pi) / (z - s);
}

// Midpoint-rule representation, valid for 0.25 <= Im z < pi/h:
//   w(z) = (i h / pi) sum_k exp(-t_k^2)/(z - t_k) + 2 exp(-z^2)/(1 + exp(-2 pi i z / h)),
// t_k = (k + 1/2) h.  Truncation and aliasing errors are below exp(-pi^2/h^2).
inline cplx midpoint_sum(cplx z) {
    constexpr double h = 0.5;
    constexpr double pi = 3.141592653589793238462643383279503;
    cplx s = 0.0;
    for (int k = -13; k <= 12; ++k) {
        const double t = (k + 0.5) * h;
        s += std::exp(-t * t) / (z - t);
    }
    s *= cplx(0.0, h / pi);
    const cplx corr = 2.0 * std::exp(-z * z) / (1.0 + std::exp(cplx(0.0, -2.0 * pi / h) * z));
    return s + corr;
}

// One Taylor step of w' = -2 z w + 2i/sqrt(pi) from (z0, w0) to z0 + dz, using the
// derivative recurrence w^(n+1) = -2 (z w^(n) + n w^(n-1)).
inline cplx taylor_step(cplx z0, cplx w0, cplx dz) {
    cplx prev = w0;
    cplx curr = -2.0 * z0 * w0 + cplx(0.0, 2.0 * inv_sqrt_pi);
    cplx sum = prev + curr * dz;
    cplx dzn = dz;
    double fact = 1.0;
    for (int n = 1; n <= 48; ++n) {
        const cplx next = -2.0 * (z0 * curr + double(n) * prev);
        prev = curr;
        curr = next;
        dzn *= dz;
        fact *= n + 1;
        const cplx term = curr * dzn / fact;
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

// Upper-half-plane evaluation, Im z >= 0.
inline cplx upper_half(cplx z) {
    const double x = z.real(), y = z.imag();
    if (y > 6.0 || std::abs(z) > 100.0) {
        cplx w = continued_fraction(z);
        // On the real axis the exact real part is exp(-x^2); the continued
        // fraction only delivers the (dominant) imaginary part there.
        if (y < 1e-13) w.real(std::exp(-x * x));
        return w;
    }
    if (y >= 0.25) return midpoint_sum(z);
    const cplx z0(x, 0.25);
    return taylor_step(z0, midpoint_sum(z0), z - z0);
}

}  // namespace detail_w

// w(z) = exp(-z^2) erfc(-iz), entire; ~1e-14 relative accuracy on the closed
// upper half-plane and for moderate lower-half arguments (|Im z| up to ~25,
// beyond which exp(-z^2) in the reflection formula overflows).
inline std::complex<double> faddeeva_w(std::complex<double> z) {
    if (z.imag() < 0.0)
        return 2.0 * std::exp(-z * z) - detail_w::upper_half(-z);
    return detail_w::upper_half(z);
}

// w'(z) = -2 z w(z) + 2i/sqrt(pi).
inline std::complex<double> faddeeva_w_prime(std::complex<double> z) {
    return -2.0 * z * faddeeva_w(z) +
           std::complex<double>(0.0, 2.0 * detail_w::inv_sqrt_pi);
}

}  // namespace kdaido
