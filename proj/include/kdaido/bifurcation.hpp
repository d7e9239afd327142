#pragma once

// Center-manifold reduction at the synchronization transition: the amplitude
// equation coefficients p1, p2, p3 built from the boundary derivatives of D at
// i y_c, the reduced radial/phase flow, the bifurcating branch r0(K), and the
// predicted rotating order parameter.

#include <cmath>
#include <complex>
#include <optional>

#include "kdaido/density.hpp"
#include "kdaido/errors.hpp"
#include "kdaido/spectral.hpp"

namespace kdaido {

enum class branch_kind { pitchfork, transcritical };
enum class criticality { supercritical, subcritical };
enum class branch_side { above, below };

struct bifurcation_coefficients {
    double k_c;
    double y_c;
    cplx f1;
    cplx f2;
    cplx dp;   // D'(i y_c) boundary value
    cplx dpp;  // D''(i y_c) boundary value
    cplx p1;
    cplx p3;
    std::optional<cplx> p2;  // present iff h != 0
    branch_kind kind;
    criticality crit;
};

// D^(n)(i y) from the boundary-value formula (1/i^n)(pi g^(n) - i pi H[g^(n)]);
// differencing D across the axis would straddle the branch cut instead.
inline cplx spectral_boundary_derivative(const density& model, double y, int n) {
    const cplx num(kd_pi * model.derivative(y, n), -kd_pi * model.hilbert_derivative(y, n));
    return num / std::pow(cplx(0.0, 1.0), n);
}

inline bifurcation_coefficients coefficients(const density& model, const coupling_params& params) {
    const assumption_report rep = check_assumptions(model, params);
    if (!rep.a1_positive_cos || !rep.a1_first_harmonic)
        throw assumption_violation("A1 failed: need cos(alpha1) > 0 and K_c < K_c2");
    if (!rep.a3_unique_max)
        throw assumption_violation("A3 failed: maximizing transition root is not unique");
    if (!rep.a4_transversal)
        throw assumption_violation("A4 failed: eigenvalue path is not transversal (Re p1 <= 0)");

    const critical_point cp = find_critical_point(model, params);
    const fourier_pair fp(params);
    bifurcation_coefficients c{};
    c.k_c = cp.k_c;
    c.y_c = cp.y_c;
    c.f1 = fp.f1;
    c.f2 = fp.f2;
    c.dp = spectral_boundary_derivative(model, cp.y_c, 1);
    c.dpp = spectral_boundary_derivative(model, cp.y_c, 2);
    c.p1 = -1.0 / (cplx(0.0, 1.0) * cp.k_c * cp.k_c * fp.f1 * c.dp);
    c.p3 = cp.k_c * cp.k_c * c.dpp / (8.0 * c.dp);
    if (params.h != 0.0) {
        c.p2 = 2.0 * cplx(0.0, 1.0) * cp.k_c * fp.f2 * std::cos(params.alpha1) /
               (1.0 - fp.f2 / fp.f1);
        c.kind = branch_kind::transcritical;
        c.crit = c.p2->real() < 0.0 ? criticality::supercritical : criticality::subcritical;
    } else {
        c.kind = branch_kind::pitchfork;
        c.crit = c.p3.real() < 0.0 ? criticality::supercritical : criticality::subcritical;
    }
    return c;
}

struct branch_point {
    double r0;
    branch_side side;
    bool stable;
};

// Leading-order bifurcating branch: r0 = sqrt(-Re p1 (K - K_c)/Re p3) for the
// pitchfork, r0 = -(Re p1/Re p2)(K - K_c) for the transcritical branch; nullopt
// when no nonnegative branch exists on the requested side of K_c.
inline std::optional<branch_point> fixed_point(const bifurcation_coefficients& c, double K) {
    const double dk = K - c.k_c;
    double r0;
    if (c.kind == branch_kind::pitchfork) {
        const double r2 = -c.p1.real() * dk / c.p3.real();
        if (r2 < 0.0) return std::nullopt;
        r0 = std::sqrt(r2);
    } else {
        r0 = -(c.p1.real() / c.p2->real()) * dk;
        if (r0 < 0.0) return std::nullopt;
    }
    return branch_point{r0, dk >= 0.0 ? branch_side::above : branch_side::below,
                        c.crit == criticality::supercritical};
}

struct flow_rates {
    double dr_dt;
    double dpsi_dt_order;  // leading phase-drift magnitude, not integrated
};

// truncated radial flow dr/dt = Re p1 r (K - K_c) + Re p3 r^3 (pitchfork) or
// + Re p2 r^2 (transcritical), with the Im-part drift reported alongside
inline flow_rates reduced_flow(const bifurcation_coefficients& c, double K, double r) {
    const double dk = K - c.k_c;
    flow_rates f{};
    if (c.kind == branch_kind::pitchfork) {
        f.dr_dt = c.p1.real() * r * dk + c.p3.real() * r * r * r;
        f.dpsi_dt_order = c.p1.imag() * dk + c.p3.imag() * r * r;
    } else {
        f.dr_dt = c.p1.real() * r * dk + c.p2->real() * r * r;
        f.dpsi_dt_order = c.p1.imag() * dk + c.p2->imag() * r;
    }
    return f;
}

struct order_parameter_prediction {
    double amplitude;      // |eta_1| = r0 (|1/(2 f1)| = 1)
    double velocity;       // leading-order rotation y_c
    double velocity_band;  // |Im-part drift| at r0, the O(K - K_c) correction
    cplx phase_offset;     // 1/(2 i f1)
};

inline order_parameter_prediction predicted_order_parameter(const bifurcation_coefficients& c,
                                                            double K) {
    const auto bp = fixed_point(c, K);
    if (!bp) throw no_branch("no bifurcating branch at the requested coupling");
    order_parameter_prediction p{};
    const cplx offset = 1.0 / (2.0 * cplx(0.0, 1.0) * c.f1);
    p.amplitude = bp->r0 * std::abs(offset);
    p.velocity = c.y_c;
    p.velocity_band = std::abs(reduced_flow(c, K, bp->r0).dpsi_dt_order);
    p.phase_offset = offset;
    return p;
}

struct yc_estimate {
    double estimate_plus;   // +g(0)/H[g]'(0) * alpha1
    double estimate_minus;  // the printed sign variant
    double root_value;      // transition root from the scan
};

// Small-lag linear estimate of y_c in both sign conventions next to the true
// root, for even densities.
inline yc_estimate small_alpha_yc(const density& model, double alpha1) {
    const double mag = model(0.0) / model.hilbert_derivative(0.0, 1) * alpha1;
    double root = 0.0;
    if (alpha1 != 0.0) {
        const auto roots = transition_curve_roots(model, alpha1);
        if (roots.empty()) throw no_roots("transition curve has no roots in the search interval");
        std::size_t best = 0;
        for (std::size_t i = 1; i < roots.size(); ++i)
            if (model(roots[i]) > model(roots[best])) best = i;
        root = roots[best];
    }
    return {mag, -mag, root};
}

}  // namespace kdaido
