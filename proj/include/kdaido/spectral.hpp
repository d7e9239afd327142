#pragma once

// Spectral side of the model: the function D(lambda) = Integral g(w)/(lambda - i w) dw
// with its maximal analytic continuation (right half plane / imaginary axis / strip
// on the left), eigenvalue and generalized-eigenvalue solvers for the first two
// harmonics, the transition-point computation (K_c, y_c, K_c2), assumption checks,
// and the resolvent pairings used by the center-manifold reduction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "kdaido/density.hpp"
#include "kdaido/errors.hpp"
#include "kdaido/quadrature.hpp"

namespace kdaido {

using cplx = std::complex<double>;

// Coupling parameters (K, alpha1, alpha2, h).  The checked factory enforces
// K > 0 and cos(alpha1) > 0; the unchecked one exists so that assumption
// violations can be constructed and reported rather than merely rejected.
struct coupling_params {
    double K;
    double alpha1;
    double alpha2;
    double h;

    static coupling_params make(double K, double alpha1, double alpha2 = 0.0, double h = 0.0) {
        if (!(K > 0.0)) throw config_error("coupling requires K > 0");
        if (!(std::cos(alpha1) > 0.0)) throw config_error("coupling requires cos(alpha1) > 0");
        return {K, alpha1, alpha2, h};
    }
    static coupling_params unchecked(double K, double alpha1, double alpha2 = 0.0, double h = 0.0) {
        return {K, alpha1, alpha2, h};
    }
};

// First two Fourier coefficients of the coupling function:
// f1 = (sin a1 - i cos a1)/2, f2 = (h/2)(sin 2 a2 - i cos 2 a2).
struct fourier_pair {
    cplx f1;
    cplx f2;
    explicit fourier_pair(const coupling_params& p)
        : f1(0.5 * std::sin(p.alpha1), -0.5 * std::cos(p.alpha1)),
          f2(0.5 * p.h * std::sin(2.0 * p.alpha2), -0.5 * p.h * std::cos(2.0 * p.alpha2)) {}
};

// n-th derivative (n <= 2) of the maximally continued D; the closed forms below
// are single analytic functions on Re lambda > -delta, so every branch of the
// continuation is obtained by direct evaluation.
inline cplx spectral_function(const density& model, cplx lambda, int n = 0) {
    if (n < 0 || n > 2) throw config_error("spectral_function supports n <= 2");
    if (!(lambda.real() > -model.strip_half_width()))
        throw strip_violation("Re lambda must exceed -strip_half_width");
    if (model.kind() == density_kind::gaussian) {
        // D(lambda) = sqrt(pi/2)/sigma * w(i lambda / (sqrt(2) sigma)), entire
        const double s = model.sigma();
        const cplx z = cplx(0.0, 1.0) * lambda / (std::sqrt(2.0) * s);
        const double c = std::sqrt(kd_pi / 2.0) / s;
        const cplx dz = cplx(0.0, 1.0) / (std::sqrt(2.0) * s);
        const cplx w = faddeeva_w(z);
        if (n == 0) return c * w;
        if (n == 1) return c * faddeeva_w_prime(z) * dz;
        const cplx wpp = (4.0 * z * z - 2.0) * w - cplx(0.0, 4.0 / std::sqrt(kd_pi)) * z;
        return c * wpp * dz * dz;
    }
    cplx acc = 0.0;
    for (const auto& cmp : model.components()) {
        // component D = w / (lambda + gamma - i c)
        const cplx den = lambda + cplx(cmp.gamma, -cmp.center);
        if (n == 0) acc += cmp.weight / den;
        if (n == 1) acc -= cmp.weight / (den * den);
        if (n == 2) acc += 2.0 * cmp.weight / (den * den * den);
    }
    return acc;
}

// Plain quadrature of (-1)^n n! Integral g/(lambda - i w)^{n+1} dw (no
// continuation terms); the independent oracle for the closed forms.
inline cplx spectral_function_quadrature(const density& model, cplx lambda, int n = 0) {
    const double fac = (n == 0) ? 1.0 : (n == 1) ? -1.0 : 2.0;
    const auto f = [&](double w) {
        const cplx den = lambda - cplx(0.0, w);
        cplx p = den;
        for (int k = 0; k < n; ++k) p *= den;
        return model(w) / p;
    };
    return fac * quad::integrate_real_line(f, std::max(model.scale(), std::abs(lambda)));
}

// D2(lambda) = Integral g/(lambda - 2 i w) dw = D(lambda/2)/2, continued like D.
inline cplx spectral_function2(const density& model, cplx lambda) {
    return 0.5 * spectral_function(model, 0.5 * lambda, 0);
}

namespace detail_newton {

// damped complex Newton; step halving on residual increase, 200-iteration cap
template <class F, class Fp, class Guard>
std::optional<cplx> solve(F&& f, Fp&& fp, cplx seed, Guard&& in_domain, double tol = 1e-10) {
    cplx lam = seed;
    if (!in_domain(lam)) return std::nullopt;
    cplx res = f(lam);
    for (int it = 0; it < 200; ++it) {
        if (std::abs(res) < tol) return lam;
        const cplx dres = fp(lam);
        if (dres == cplx(0.0, 0.0)) return std::nullopt;
        const cplx step = res / dres;
        double damp = 1.0;
        cplx next = lam - step;
        cplx next_res;
        for (;;) {
            if (in_domain(next)) {
                next_res = f(next);
                if (std::abs(next_res) <= std::abs(res) || damp < 1e-6) break;
            } else if (damp < 1e-6) {
                return std::nullopt;  // even tiny steps leave the domain
            }
            damp *= 0.5;
            next = lam - damp * step;
        }
        lam = next;
        res = next_res;
    }
    return std::nullopt;
}

}  // namespace detail_newton

// Root of D(lambda) = 1/(i K f1) (j=1) or D2(lambda) = 1/(2 i K f2) (j=2) in the
// open right half plane; nullopt when the iteration leaves it or fails to
// converge (no eigenvalue, e.g. K below threshold).
inline std::optional<cplx> eigenvalue_solve(const density& model, const coupling_params& params,
                                            int j, cplx seed) {
    if (j != 1 && j != 2) throw invalid_harmonic("only harmonics j = 1, 2 carry point spectrum");
    const fourier_pair fp(params);
    const cplx fj = (j == 1) ? fp.f1 : fp.f2;
    if (fj == cplx(0.0, 0.0)) throw invalid_harmonic("f_j = 0: multiplication operator only");
    const cplx target = 1.0 / (double(j) * cplx(0.0, 1.0) * params.K * fj);
    const auto f = [&](cplx lam) {
        return (j == 1 ? spectral_function(model, lam, 0) : spectral_function2(model, lam)) - target;
    };
    const auto fprime = [&](cplx lam) {
        return j == 1 ? spectral_function(model, lam, 1) : 0.25 * spectral_function(model, 0.5 * lam, 1);
    };
    return detail_newton::solve(f, fprime, seed, [](cplx l) { return l.real() > 0.0; });
}

// Root of the continued characteristic equation 1 - i K f1 D(lambda) = 0; valid on
// both sides of the imaginary axis, so it tracks lambda_c(K) through criticality.
inline cplx generalized_eigenvalue_solve(const density& model, const coupling_params& params,
                                         cplx seed) {
    const fourier_pair fp(params);
    const cplx pref = cplx(0.0, 1.0) * params.K * fp.f1;
    const double delta = model.strip_half_width();
    const auto f = [&](cplx lam) { return 1.0 - pref * spectral_function(model, lam, 0); };
    const auto fprime = [&](cplx lam) { return -pref * spectral_function(model, lam, 1); };
    const auto root = detail_newton::solve(f, fprime, seed,
                                           [delta](cplx l) { return l.real() > -0.98 * delta; });
    if (!root) throw no_convergence("generalized eigenvalue iteration did not converge");
    return *root;
}

// All simple roots of F(y) = tan(alpha1) g(y) - H[g](y) in [lo, hi]:
// 2000-point sign scan, bisection to 1e-12, Newton polish.
inline std::vector<double> transition_curve_roots(const density& model, double alpha1, double lo,
                                                  double hi) {
    const double t = std::tan(alpha1);
    const auto f = [&](double y) { return t * model(y) - model.hilbert(y); };
    const auto fprime = [&](double y) {
        return t * model.derivative(y, 1) - model.hilbert_derivative(y, 1);
    };
    constexpr int grid = 2000;
    std::vector<double> roots;
    double prev_y = lo, prev_f = f(lo);
    for (int i = 1; i <= grid; ++i) {
        const double y = lo + (hi - lo) * i / grid;
        const double fy = f(y);
        if (prev_f == 0.0) roots.push_back(prev_y);
        if (prev_f * fy < 0.0) {
            double a = prev_y, b = y, fa = prev_f;
            while (b - a > 1e-12) {
                const double mid = 0.5 * (a + b);
                if (mid <= a || mid >= b) break;
                const double fm = f(mid);
                if (fa * fm <= 0.0)
                    b = mid;
                else
                    a = mid, fa = fm;
            }
            double r = 0.5 * (a + b);
            for (int it = 0; it < 6; ++it) {
                const double d = fprime(r);
                if (d == 0.0) break;
                const double step = f(r) / d;
                r -= step;
                if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(r))) break;
            }
            if (roots.empty() || std::abs(r - roots.back()) > 1e-9) roots.push_back(r);
        }
        prev_y = y;
        prev_f = fy;
    }
    return roots;
}

inline std::vector<double> transition_curve_roots(const density& model, double alpha1) {
    const double s = 10.0 * model.scale();
    return transition_curve_roots(model, alpha1, -s, s);
}

struct critical_point {
    std::vector<double> roots_y;  // roots of the first-harmonic transition curve
    double y_c;
    double k_c;
    double k_c2;  // +inf when the second harmonic never destabilizes
    bool unique_max;
};

// K_c = 2 cos(alpha1) / (pi g(y_c)) with y_c the g-maximizing root; the
// second-harmonic threshold K_c2 = inf_j 2 cos(2 alpha2) / (pi h g(u_j)) over the
// roots u_j of the curve with angle 2 alpha2 (finite only when h cos(2 alpha2) > 0).
inline critical_point find_critical_point(const density& model, const coupling_params& params) {
    auto roots = transition_curve_roots(model, params.alpha1);
    if (roots.empty()) throw no_roots("transition curve has no roots in the search interval");
    std::size_t best = 0;
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (model(roots[i]) > model(roots[best])) best = i;
    const double y_c = roots[best];
    const double g_max = model(y_c);
    for (std::size_t i = 0; i < roots.size(); ++i)
        // (A3) tie tolerance: quadrature-limited resolution of the maximizer
        if (i != best && std::abs(model(roots[i]) - g_max) < 1e-9 * g_max)
            throw ambiguous_maximizer("two transition roots maximize g within tolerance");
    const double k_c = 2.0 * std::cos(params.alpha1) / (kd_pi * g_max);

    double k_c2 = std::numeric_limits<double>::infinity();
    if (params.h != 0.0 && params.h * std::cos(2.0 * params.alpha2) > 0.0) {
        for (double u : transition_curve_roots(model, 2.0 * params.alpha2)) {
            const double cand = 2.0 * std::cos(2.0 * params.alpha2) / (kd_pi * params.h * model(u));
            if (cand > 0.0) k_c2 = std::min(k_c2, cand);
        }
    }
    return {std::move(roots), y_c, k_c, k_c2, true};
}

// lambda_c(K): seed i K f1 at K = 2 K_c, then continue in K with step K_c/50
// down (or up) to the requested coupling, reseeding each solve at the previous root.
inline cplx track_lambda(const density& model, const coupling_params& params) {
    const critical_point cp = find_critical_point(model, params);
    const fourier_pair fp(params);
    double K = 2.0 * cp.k_c;
    coupling_params q = params;
    q.K = K;
    cplx lam = generalized_eigenvalue_solve(model, q, cplx(0.0, 1.0) * K * fp.f1);
    const double dK = cp.k_c / 50.0;
    while (std::abs(q.K - params.K) > 1e-12 * cp.k_c) {
        q.K += std::clamp(params.K - q.K, -dK, dK);
        lam = generalized_eigenvalue_solve(model, q, lam);
    }
    return lam;
}

struct assumption_report {
    bool a1_positive_cos;     // cos(alpha1) > 0
    bool a1_first_harmonic;   // K_c < K_c2
    bool a2_analytic;         // strip evaluation + decay bound on the boundary
    bool a3_unique_max;       // y_c uniquely maximizes g among roots
    bool a4_transversal;      // Re p1 > 0 via d lambda_c/dK = -1/(i K_c^2 f1 D'(i y_c))
    double cos_alpha1;
    double k_c;
    double k_c2;
    double decay_constant;  // witness C with |g(z)| <= C/(1+|z|^2) on the strip boundary
    double y_c;
    double re_p1;
    bool all() const {
        return a1_positive_cos && a1_first_harmonic && a2_analytic && a3_unique_max &&
               a4_transversal;
    }
};

inline assumption_report check_assumptions(const density& model, const coupling_params& params) {
    assumption_report r{};
    r.cos_alpha1 = std::cos(params.alpha1);
    r.a1_positive_cos = r.cos_alpha1 > 0.0;

    const double delta = model.strip_half_width();
    r.decay_constant = 0.0;
    r.a2_analytic = true;
    try {
        for (double x : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0})
            for (double sgn : {-1.0, 1.0}) {
                const cplx z(sgn * x * model.scale(), sgn * 0.95 * delta);
                const double c = std::abs(model.eval(z)) * (1.0 + std::norm(z));
                if (!std::isfinite(c)) r.a2_analytic = false;
                r.decay_constant = std::max(r.decay_constant, c);
            }
    } catch (const error&) {
        r.a2_analytic = false;
    }

    r.k_c = r.k_c2 = r.y_c = r.re_p1 = std::numeric_limits<double>::quiet_NaN();
    r.a3_unique_max = false;
    r.a1_first_harmonic = false;
    r.a4_transversal = false;
    try {
        const critical_point cp = find_critical_point(model, params);
        r.k_c = cp.k_c;
        r.k_c2 = cp.k_c2;
        r.y_c = cp.y_c;
        r.a3_unique_max = cp.unique_max;
        r.a1_first_harmonic = cp.k_c < cp.k_c2;
        const fourier_pair fp(params);
        const cplx dp = spectral_function(model, cplx(0.0, cp.y_c), 1);
        const cplx p1 = -1.0 / (cplx(0.0, 1.0) * cp.k_c * cp.k_c * fp.f1 * dp);
        r.re_p1 = p1.real();
        r.a4_transversal = r.re_p1 > 0.0;
    } catch (const error&) {
        // flags stay false; witnesses stay NaN
    }
    return r;
}

// Bounded holomorphic test functions on the closed upper half plane.
struct test_function {
    enum class kind { p0, cauchy_pole } tag;
    double a;  // pole height for 1/(w + i a), a > 0

    static test_function p0() { return {kind::p0, 0.0}; }
    static test_function cauchy_pole(double a) {
        if (!(a > 0.0)) throw config_error("cauchy_pole requires a > 0");
        return {kind::cauchy_pole, a};
    }
    cplx operator()(cplx w) const {
        return tag == kind::p0 ? cplx(1.0, 0.0) : 1.0 / (w + cplx(0.0, a));
    }
};

// Three-branch pairing Integral f(w) g(w)/(lambda - i w) dw: plain quadrature off
// the axis, the boundary-value formula pi f g - i pi H[f g] on it, and the
// +2 pi f(-i lambda) g(-i lambda) continuation term on the left.
template <class F>
cplx pairing(const density& model, cplx lambda, F&& func) {
    if (!(lambda.real() > -model.strip_half_width()))
        throw strip_violation("Re lambda must exceed -strip_half_width");
    const double scale = std::max(model.scale(), std::abs(lambda));
    if (lambda.real() == 0.0) {
        const double y = lambda.imag();
        const auto fg = [&](double w) { return func(cplx(w, 0.0)) * model(w); };
        return kd_pi * fg(y) - cplx(0.0, kd_pi) * quad::hilbert_pv(fg, y, scale);
    }
    const auto integrand = [&](double w) {
        return func(cplx(w, 0.0)) * model(w) / (lambda - cplx(0.0, w));
    };
    cplx value = quad::integrate_real_line(integrand, scale);
    if (lambda.real() < 0.0) {
        const cplx z = -cplx(0.0, 1.0) * lambda;
        value += 2.0 * kd_pi * func(z) * model.eval(z);
    }
    return value;
}

// ((lambda - T1)^{-1} phi, psi*) = (phi psi pairing) + i K f1 / (1 - i K f1 D) *
// (phi pairing) * (psi pairing), every factor maximally continued.
inline cplx resolvent_bilinear(const density& model, const coupling_params& params, cplx lambda,
                               test_function phi, test_function psi) {
    const fourier_pair fp(params);
    const cplx pref = cplx(0.0, 1.0) * params.K * fp.f1;
    const cplx denom = 1.0 - pref * spectral_function(model, lambda, 0);
    if (std::abs(denom) < 1e-12)
        throw at_singularity("lambda is a (generalized) eigenvalue of T1");
    const cplx both = pairing(model, lambda, [&](cplx w) { return phi(w) * psi(w); });
    const cplx p_phi = pairing(model, lambda, phi);
    const cplx p_psi = pairing(model, lambda, psi);
    return both + pref / denom * p_phi * p_psi;
}

// Scalar coefficient c with Pi_c phi = c v_lambda: c = -(phi pairing at lambda_c)/D'(lambda_c).
inline cplx projection_coefficient(const density& model, const coupling_params& params,
                                   cplx lambda_c, test_function phi) {
    (void)params;
    const cplx dp = spectral_function(model, lambda_c, 1);
    if (std::abs(dp) < 1e-12)
        throw degenerate_eigenvalue("D'(lambda_c) vanishes: eigenvalue not simple");
    return -pairing(model, lambda_c, phi) / dp;
}

}  // namespace kdaido
