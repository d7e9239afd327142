#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "kdaido/errors.hpp"

namespace kdaido {
namespace quad {

// Gauss-7 / Kronrod-15 pair on [-1, 1]; nonnegative abscissae, symmetric weights.
inline constexpr double gk_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
// Gauss weights attach to gk_x[1], gk_x[3], gk_x[5], gk_x[7].
inline constexpr double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class T>
double norm_of(const T& v) {
    if constexpr (std::is_same_v<T, std::complex<double>>)
        return std::abs(v);
    else
        return std::abs(static_cast<double>(v));
}

template <class F>
using result_t = std::invoke_result_t<F&, double>;

template <class T>
struct panel {
    double a, b;
    T value;
    double err;
};

// One G7K15 evaluation on [a, b]; returns Kronrod value and |K15 - G7| estimate.
template <class F>
panel<result_t<F>> gk15(F& f, double a, double b) {
    using T = result_t<F>;
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    T k15{};
    T g7{};
    for (int i = 0; i < 8; ++i) {
        T fs = f(c + hw * gk_x[i]);
        if (i < 7)
            fs += f(c - hw * gk_x[i]);
        k15 += gk_wk[i] * fs;
        if (i % 2 == 1)
            g7 += gk_wg[i / 2] * fs;
    }
    k15 *= hw;
    g7 *= hw;
    return {a, b, k15, norm_of<T>(k15 - g7)};
}

// Globally adaptive G7K15 on a finite interval: repeatedly bisect the panel with
// the largest error estimate until sum(err) <= max(abs_tol, rel_tol*|I|).
template <class F>
result_t<F> integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                      double rel_tol = 1e-12, std::size_t max_panels = 4000) {
    using T = result_t<F>;
    std::vector<panel<T>> panels;
    panels.push_back(gk15(f, a, b));
    double total_err = panels[0].err;
    T total = panels[0].value;
    while (panels.size() < max_panels) {
        if (total_err <= std::max(abs_tol, rel_tol * norm_of<T>(total)))
            break;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err)
                worst = i;
        panel<T> p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b)
            break; // interval exhausted at machine precision
        panel<T> left = gk15(f, p.a, mid);
        panel<T> right = gk15(f, mid, p.b);
        total += left.value + right.value - p.value;
        total_err += left.err + right.err - p.err;
        panels[worst] = left;
        panels.push_back(right);
    }
    if (!std::isfinite(total_err) || !std::isfinite(norm_of<T>(total)) ||
        (total_err > std::max(abs_tol, rel_tol * norm_of<T>(total)) &&
         total_err > 10 * abs_tol))
        throw quadrature_failure("adaptive quadrature did not reach tolerance");
    return total;
}

// Integral over the whole real line via x = scale*tan(u), u in (-pi/2, pi/2).
// The substitution integrates the tails exactly; integrands decaying like
// C/(1+x^2) stay bounded after the change of variables.
template <class F>
result_t<F> integrate_real_line(F&& f, double scale = 1.0, double abs_tol = 1e-12,
                                double rel_tol = 1e-12) {
    auto g = [&f, scale](double u) {
        const double cu = std::cos(u);
        const double x = scale * std::tan(u);
        return f(x) * (scale / (cu * cu));
    };
    constexpr double half_pi = 1.57079632679489661923;
    return integrate(g, -half_pi, half_pi, abs_tol, rel_tol);
}

// Integral over (0, inf) via the same substitution.
template <class F>
result_t<F> integrate_half_line(F&& f, double scale = 1.0, double abs_tol = 1e-12,
                                double rel_tol = 1e-12) {
    auto g = [&f, scale](double u) {
        const double cu = std::cos(u);
        const double x = scale * std::tan(u);
        return f(x) * (scale / (cu * cu));
    };
    constexpr double half_pi = 1.57079632679489661923;
    return integrate(g, 0.0, half_pi, abs_tol, rel_tol);
}

// Hilbert transform H[f](y) = (-1/pi) p.v. Integral f(y+w)/w dw, evaluated as the
// symmetric difference quotient (f(y+w) - f(y-w))/w on (0, inf): the principal
// value singularity cancels analytically (the quotient tends to 2 f'(y) at 0).
template <class F>
result_t<F> hilbert_pv(F&& f, double y, double scale = 1.0, double abs_tol = 1e-12,
                       double rel_tol = 1e-12) {
    auto diff = [&f, y](double w) { return (f(y + w) - f(y - w)) / w; };
    constexpr double inv_pi = 0.318309886183790671538;
    return -inv_pi * integrate_half_line(diff, scale, abs_tol, rel_tol);
}

} // namespace quad
} // namespace kdaido
