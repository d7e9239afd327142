// kdaido/simulate.hpp
//
// Two independent simulators for the two-harmonic mean-field phase model plus
// the measurement utilities used by the verification harness: a finite-N
// ensemble advanced by classical RK4 in O(N)-per-step order-parameter form,
// the truncated Fourier-Galerkin hierarchy of the continuum equation, and the
// linearized single-mode flow whose weak pairings realize decay measurements.
//
// The Galerkin free-stream part i j w Z_j is exponentiated exactly by an
// integrating factor (Lawson RK4): on quantile frequency grids max |j w| dt
// is O(40), far outside the RK4 stability region, so plain RK4 on the full
// right side diverges while the coupling part alone is nonstiff.  The
// finite-N phase equation has no such stiffness (its Lipschitz constant is
// O(K(1 + 2h))) and uses plain RK4.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kdaido/density.hpp"
#include "kdaido/errors.hpp"
#include "kdaido/spectral.hpp"

namespace kdaido {

// FNV-1a 64-bit; traces and reports carry it as the config provenance hash.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail_sim {

inline void put(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g|", v);
    s += buf;
}

inline void put(std::string& s, long long v) {
    s += std::to_string(v);
    s += '|';
}

inline void describe(std::string& s, const density& model) {
    switch (model.kind()) {
        case density_kind::lorentzian:
            s += "lorentzian|";
            put(s, model.gamma());
            break;
        case density_kind::gaussian:
            s += "gaussian|";
            put(s, model.sigma());
            break;
        case density_kind::lorentzian_mixture:
            s += "mixture|";
            for (const auto& c : model.components()) {
                put(s, c.weight);
                put(s, c.center);
                put(s, c.gamma);
            }
            break;
    }
}

inline void describe(std::string& s, const coupling_params& p) {
    put(s, p.K);
    put(s, p.alpha1);
    put(s, p.alpha2);
    put(s, p.h);
}

}  // namespace detail_sim

// Initial ensemble for the finite-N simulator.  uniform_phases draws i.i.d.
// phases from the config seed; small_coherence is the deterministic twisted
// lattice theta_i = phi_i - 2 eps sin(phi_i), phi_i = 2 pi (i - 1/2) / N,
// which realizes a first order parameter of eps + O(eps^2).
struct initial_condition {
    enum class kind { uniform_phases, small_coherence } tag = kind::uniform_phases;
    double epsilon = 0.0;

    static initial_condition uniform_phases() { return {kind::uniform_phases, 0.0}; }
    static initial_condition small_coherence(double eps) {
        // the lattice map stays monotone only for eps < 1/2
        if (!(eps >= 0.0 && eps < 0.5)) throw config_error("small_coherence requires eps in [0, 1/2)");
        return {kind::small_coherence, eps};
    }
};

struct finite_n_config {
    int n = 10000;
    density model = density::lorentzian(1.0);
    coupling_params params = coupling_params::unchecked(2.0, 0.0);
    double dt = 0.01;
    double t_end = 200.0;
    double burn_in = 100.0;
    sample_scheme sampling = sample_scheme::quantile_midpoint();
    std::uint64_t seed = 0;
    initial_condition init = initial_condition::uniform_phases();

    void validate() const {
        if (n < 1) throw config_error("finite_n_config requires n >= 1");
        if (!(dt > 0.0 && dt <= 0.05)) throw config_error("finite_n_config requires 0 < dt <= 0.05");
        if (!(t_end > 0.0)) throw config_error("finite_n_config requires t_end > 0");
        if (!(burn_in >= 0.0 && burn_in < t_end)) throw config_error("finite_n_config requires 0 <= burn_in < t_end");
        if (!(params.K >= 0.0)) throw config_error("finite_n_config requires K >= 0");
        if (!(init.epsilon >= 0.0 && init.epsilon < 0.5)) throw config_error("init epsilon must lie in [0, 1/2)");
    }

    std::string hash_string() const {
        std::string s = "finite_n|";
        detail_sim::put(s, static_cast<long long>(n));
        detail_sim::describe(s, model);
        detail_sim::describe(s, params);
        detail_sim::put(s, dt);
        detail_sim::put(s, t_end);
        detail_sim::put(s, burn_in);
        detail_sim::put(s, static_cast<long long>(sampling.tag == sample_scheme::kind::seeded));
        detail_sim::put(s, static_cast<long long>(sampling.seed));
        detail_sim::put(s, static_cast<long long>(seed));
        detail_sim::put(s, static_cast<long long>(init.tag == initial_condition::kind::small_coherence));
        detail_sim::put(s, init.epsilon);
        return s;
    }
    std::uint64_t hash() const { return fnv1a(hash_string()); }
};

struct galerkin_config {
    int j_max = 16;
    int m_nodes = 400;
    sample_scheme node_scheme = sample_scheme::quantile_midpoint();
    density model = density::lorentzian(1.0);
    coupling_params params = coupling_params::unchecked(2.0, 0.0);
    double dt = 0.01;
    double t_end = 200.0;
    double init_amplitude = 1e-3;  // Z_1(0, w) = eps along P0, other modes zero

    void validate() const {
        if (j_max < 4) throw config_error("galerkin_config requires j_max >= 4");
        if (m_nodes < 1) throw config_error("galerkin_config requires m_nodes >= 1");
        if (node_scheme.tag != sample_scheme::kind::quantile_midpoint)
            throw config_error("galerkin_config supports quantile_midpoint nodes only");
        if (!(dt > 0.0)) throw config_error("galerkin_config requires dt > 0");
        if (!(t_end > 0.0)) throw config_error("galerkin_config requires t_end > 0");
        if (!(params.K >= 0.0)) throw config_error("galerkin_config requires K >= 0");
        if (!(std::abs(init_amplitude) <= 1.0)) throw config_error("init_amplitude must satisfy |eps| <= 1");
    }

    std::string hash_string() const {
        std::string s = "galerkin|";
        detail_sim::put(s, static_cast<long long>(j_max));
        detail_sim::put(s, static_cast<long long>(m_nodes));
        detail_sim::describe(s, model);
        detail_sim::describe(s, params);
        detail_sim::put(s, dt);
        detail_sim::put(s, t_end);
        detail_sim::put(s, init_amplitude);
        return s;
    }
    std::uint64_t hash() const { return fnv1a(hash_string()); }
};

// Order-parameter time series.  |eta_k| <= 1 + 1e-9 for every sample: the
// finite-N parameters are means of unit-modulus terms, and the Galerkin
// integrator aborts before emitting an unphysical sample.
struct trace {
    std::vector<double> times;
    std::vector<cplx> eta1;
    std::vector<cplx> eta2;
    std::uint64_t config_hash = 0;
};

// Weak-pairing time series from the linearized flow.
struct pairing_trace {
    std::vector<double> times;
    std::vector<cplx> values;
    std::uint64_t config_hash = 0;
};

// dtheta_i/dt = w_i + K Im(e^{i a1} eta1 e^{-i theta_i})
//                   + K h Im(e^{2 i a2} eta2 e^{-2 i theta_i}),
// classical RK4 at fixed dt, order parameters recorded at every step.
inline trace simulate_finite_n(const finite_n_config& cfg) {
    cfg.validate();
    const int n = cfg.n;
    const double dt = cfg.dt;
    const long long steps = std::llround(cfg.t_end / dt);
    const std::vector<double> omega = cfg.model.sample(n, cfg.sampling);

    std::vector<double> theta(n);
    if (cfg.init.tag == initial_condition::kind::small_coherence) {
        for (int i = 0; i < n; ++i) {
            const double phi = 2.0 * kd_pi * (i + 0.5) / n;
            theta[i] = phi - 2.0 * cfg.init.epsilon * std::sin(phi);
        }
    } else {
        std::mt19937_64 rng(cfg.seed);
        for (int i = 0; i < n; ++i) {
            const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            theta[i] = 2.0 * kd_pi * u;
        }
    }

    const cplx rot1 = std::polar(cfg.params.K, cfg.params.alpha1);
    const cplx rot2 = std::polar(cfg.params.K * cfg.params.h, 2.0 * cfg.params.alpha2);
    std::vector<double> cbuf(n), sbuf(n);

    // one trig pass fills cbuf/sbuf and accumulates both order parameters
    auto order = [&](const std::vector<double>& th) {
        double c1r = 0.0, c1i = 0.0, c2r = 0.0, c2i = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = std::cos(th[i]), s = std::sin(th[i]);
            cbuf[i] = c;
            sbuf[i] = s;
            c1r += c;
            c1i += s;
            c2r += c * c - s * s;
            c2i += 2.0 * c * s;
        }
        return std::pair<cplx, cplx>{cplx(c1r / n, c1i / n), cplx(c2r / n, c2i / n)};
    };
    // phase velocities from the cbuf/sbuf filled by the matching order() call
    auto velocity = [&](std::pair<cplx, cplx> eta, std::vector<double>& out) {
        const cplx e1 = rot1 * eta.first;   // K e^{i a1} eta1
        const cplx e2 = rot2 * eta.second;  // K h e^{2 i a2} eta2
        for (int i = 0; i < n; ++i) {
            const double c = cbuf[i], s = sbuf[i];
            const double w2r = c * c - s * s, w2i = -2.0 * c * s;  // e^{-2 i theta}
            out[i] = omega[i] + e1.imag() * c - e1.real() * s + e2.real() * w2i + e2.imag() * w2r;
        }
    };

    trace out;
    out.config_hash = cfg.hash();
    out.times.reserve(steps + 1);
    out.eta1.reserve(steps + 1);
    out.eta2.reserve(steps + 1);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto shifted = [&](const std::vector<double>& k, double a) -> const std::vector<double>& {
        for (int i = 0; i < n; ++i) tmp[i] = theta[i] + a * k[i];
        return tmp;
    };

    auto eta = order(theta);
    out.times.push_back(0.0);
    out.eta1.push_back(eta.first);
    out.eta2.push_back(eta.second);
    for (long long step = 1; step <= steps; ++step) {
        velocity(eta, k1);  // order() already ran on theta for the record
        velocity(order(shifted(k1, 0.5 * dt)), k2);
        velocity(order(shifted(k2, 0.5 * dt)), k3);
        velocity(order(shifted(k3, dt)), k4);
        for (int i = 0; i < n; ++i)
            theta[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        eta = order(theta);
        out.times.push_back(step * dt);
        out.eta1.push_back(eta.first);
        out.eta2.push_back(eta.second);
    }
    return out;
}

struct galerkin_diagnostics {
    double max_mode_amplitude = 0.0;  // max over j, nodes, t of |Z_j(w_m)|
    double max_closure_level = 0.0;   // max over t of |eta_J|
};

// Truncated hierarchy dZ_j/dt = i j w Z_j + i j K (f1 eta1 Z_{j-1}
//   + f2 eta2 Z_{j-2} + conj(f1 eta1) Z_{j+1} + conj(f2 eta2) Z_{j+2}),
// j = 1..J on M equal-weight quantile nodes, Z_0 = 1 structurally,
// Z_{-1} = conj Z_1, Z_j = 0 beyond the cutoff, eta_l = mean_m Z_l(w_m).
// Advanced by Lawson RK4: with E_h = exp(i j w dt/2), E_f = E_h^2,
//   k1 = N(Z), k2 = N(E_h (Z + dt/2 k1)), k3 = N(E_h Z + dt/2 k2),
//   k4 = N(E_f Z + dt E_h k3),
//   Z <- E_f Z + dt/6 (E_f k1 + 2 E_h (k2 + k3) + k4).
inline trace simulate_galerkin(const galerkin_config& cfg, galerkin_diagnostics* diag = nullptr) {
    cfg.validate();
    const int J = cfg.j_max, M = cfg.m_nodes;
    const double dt = cfg.dt;
    const long long steps = std::llround(cfg.t_end / dt);
    const std::vector<double> omega = cfg.model.sample(M, cfg.node_scheme);
    const fourier_pair fp(cfg.params);
    const double K = cfg.params.K;

    std::vector<cplx> z(static_cast<std::size_t>(J) * M, cplx(0.0));
    for (int m = 0; m < M; ++m) z[m] = cplx(cfg.init_amplitude, 0.0);

    std::vector<cplx> eh(z.size()), ef(z.size());
    for (int j = 1; j <= J; ++j)
        for (int m = 0; m < M; ++m) {
            eh[(j - 1) * static_cast<std::size_t>(M) + m] = std::polar(1.0, 0.5 * j * omega[m] * dt);
            ef[(j - 1) * static_cast<std::size_t>(M) + m] = std::polar(1.0, j * omega[m] * dt);
        }

    auto row_mean = [&](const std::vector<cplx>& v, int j) {
        const cplx* row = v.data() + (j - 1) * static_cast<std::size_t>(M);
        cplx sum(0.0);
        for (int m = 0; m < M; ++m) sum += row[m];
        return sum / static_cast<double>(M);
    };
    // coupling part of the right side (everything except the i j w stream)
    auto nonlinear = [&](const std::vector<cplx>& v, std::vector<cplx>& out) {
        const cplx a1 = fp.f1 * row_mean(v, 1);
        const cplx a2 = fp.f2 * row_mean(v, 2);
        const cplx b1 = std::conj(a1), b2 = std::conj(a2);
        const cplx* z1 = v.data();
        for (int j = 1; j <= J; ++j) {
            const cplx pre(0.0, j * K);
            const cplx* rm1 = j >= 2 ? v.data() + (j - 2) * static_cast<std::size_t>(M) : nullptr;
            const cplx* rm2 = j >= 3 ? v.data() + (j - 3) * static_cast<std::size_t>(M) : nullptr;
            const cplx* rp1 = j + 1 <= J ? v.data() + j * static_cast<std::size_t>(M) : nullptr;
            const cplx* rp2 = j + 2 <= J ? v.data() + (j + 1) * static_cast<std::size_t>(M) : nullptr;
            cplx* o = out.data() + (j - 1) * static_cast<std::size_t>(M);
            for (int m = 0; m < M; ++m) {
                cplx acc = a1 * (rm1 ? rm1[m] : cplx(1.0));
                acc += a2 * (rm2 ? rm2[m] : (j == 2 ? cplx(1.0) : std::conj(z1[m])));
                if (rp1) acc += b1 * rp1[m];
                if (rp2) acc += b2 * rp2[m];
                o[m] = pre * acc;
            }
        }
    };

    trace out;
    out.config_hash = cfg.hash();
    out.times.reserve(steps + 1);
    out.eta1.reserve(steps + 1);
    out.eta2.reserve(steps + 1);

    auto record = [&](double t) {
        const cplx e1 = row_mean(z, 1), e2 = row_mean(z, 2), ej = row_mean(z, J);
        const double closure = std::abs(ej);
        if (diag) diag->max_closure_level = std::max(diag->max_closure_level, closure);
        if (closure > 0.5)
            throw closure_overflow("|eta_J| = " + std::to_string(closure) +
                                   " exceeds 0.5: mode cutoff too small for this coupling");
        if (std::abs(e1) > 1.0 + 1e-9 || std::abs(e2) > 1.0 + 1e-9)
            throw closure_overflow("order parameter left the unit disc: truncation no longer physical");
        double max_sq = 0.0;
        for (const cplx& v : z) max_sq = std::max(max_sq, std::norm(v));
        if (diag)
            diag->max_mode_amplitude = std::max(diag->max_mode_amplitude, std::sqrt(max_sq));
        if (!(max_sq < 1e6))
            throw mode_divergence("mode amplitude " + std::to_string(std::sqrt(max_sq)) + " diverged");
        out.times.push_back(t);
        out.eta1.push_back(e1);
        out.eta2.push_back(e2);
    };

    std::vector<cplx> k1(z.size()), k2(z.size()), k3(z.size()), k4(z.size()), tmp(z.size());
    const std::size_t sz = z.size();
    record(0.0);
    for (long long step = 1; step <= steps; ++step) {
        nonlinear(z, k1);
        for (std::size_t i = 0; i < sz; ++i) tmp[i] = eh[i] * (z[i] + 0.5 * dt * k1[i]);
        nonlinear(tmp, k2);
        for (std::size_t i = 0; i < sz; ++i) tmp[i] = eh[i] * z[i] + 0.5 * dt * k2[i];
        nonlinear(tmp, k3);
        for (std::size_t i = 0; i < sz; ++i) tmp[i] = ef[i] * z[i] + dt * (eh[i] * k3[i]);
        nonlinear(tmp, k4);
        for (std::size_t i = 0; i < sz; ++i)
            z[i] = ef[i] * z[i] + dt / 6.0 * (ef[i] * k1[i] + 2.0 * (eh[i] * (k2[i] + k3[i])) + k4[i]);
        record(step * dt);
    }
    return out;
}

// Linearized single mode dZ_j/dt = i j w Z_j + i j K f_j eta_j from
// Z_j(0, w) = phi(w); records the weak pairing (1/M) sum Z_j(t, w_m) psi(w_m)
// at every step.  Same Lawson RK4; the coupling part is rank one.
inline pairing_trace simulate_linearized(const galerkin_config& cfg, int j,
                                         test_function phi, test_function psi) {
    cfg.validate();
    if (j != 1 && j != 2) throw invalid_harmonic("linearized mode requires j in {1, 2}");
    const int M = cfg.m_nodes;
    const double dt = cfg.dt;
    const long long steps = std::llround(cfg.t_end / dt);
    const std::vector<double> omega = cfg.model.sample(M, cfg.node_scheme);
    const fourier_pair fp(cfg.params);
    const cplx drive = cplx(0.0, j * cfg.params.K) * (j == 1 ? fp.f1 : fp.f2);

    std::vector<cplx> z(M), psi_vals(M), eh(M), ef(M);
    for (int m = 0; m < M; ++m) {
        z[m] = phi(cplx(omega[m]));
        psi_vals[m] = psi(cplx(omega[m]));
        eh[m] = std::polar(1.0, 0.5 * j * omega[m] * dt);
        ef[m] = std::polar(1.0, j * omega[m] * dt);
    }

    auto mean = [&](const std::vector<cplx>& v) {
        cplx sum(0.0);
        for (int m = 0; m < M; ++m) sum += v[m];
        return sum / static_cast<double>(M);
    };
    auto pair_with_psi = [&](const std::vector<cplx>& v) {
        cplx sum(0.0);
        for (int m = 0; m < M; ++m) sum += v[m] * psi_vals[m];
        return sum / static_cast<double>(M);
    };

    pairing_trace out;
    {
        std::string s = cfg.hash_string() + "linearized|";
        detail_sim::put(s, static_cast<long long>(j));
        detail_sim::put(s, static_cast<long long>(phi.tag == test_function::kind::cauchy_pole));
        detail_sim::put(s, phi.a);
        detail_sim::put(s, static_cast<long long>(psi.tag == test_function::kind::cauchy_pole));
        detail_sim::put(s, psi.a);
        out.config_hash = fnv1a(s);
    }
    out.times.reserve(steps + 1);
    out.values.reserve(steps + 1);

    std::vector<cplx> tmp(M);
    out.times.push_back(0.0);
    out.values.push_back(pair_with_psi(z));
    for (long long step = 1; step <= steps; ++step) {
        const cplx k1 = drive * mean(z);
        for (int m = 0; m < M; ++m) tmp[m] = eh[m] * (z[m] + 0.5 * dt * k1);
        const cplx k2 = drive * mean(tmp);
        for (int m = 0; m < M; ++m) tmp[m] = eh[m] * z[m] + 0.5 * dt * k2;
        const cplx k3 = drive * mean(tmp);
        for (int m = 0; m < M; ++m) tmp[m] = ef[m] * z[m] + dt * (eh[m] * k3);
        const cplx k4 = drive * mean(tmp);
        for (int m = 0; m < M; ++m)
            z[m] = ef[m] * z[m] + dt / 6.0 * (ef[m] * k1 + 2.0 * (eh[m] * (k2 + k3)) + k4);
        out.times.push_back(step * dt);
        out.values.push_back(pair_with_psi(z));
    }
    return out;
}

struct steady_state {
    double r_mean;
    double r_std;
    double velocity;         // least-squares slope of the unwrapped arg eta1
    double velocity_stderr;  // standard error of that slope
};

// Steady-state statistics of |eta1| and of the rotation velocity over
// [t_a, t_b].  The argument is unwrapped by accumulating principal-value
// increments, valid because traces record every integrator step.
inline steady_state measure_steady_state(const trace& tr, double t_a, double t_b) {
    if (tr.times.empty()) throw window_too_short("trace is empty");
    const double tol = 1e-9 * std::max(1.0, std::abs(t_b));
    if (t_a < tr.times.front() - tol || t_b > tr.times.back() + tol || !(t_a < t_b))
        throw config_error("measurement window must lie inside the recorded times");
    const auto lo = std::lower_bound(tr.times.begin(), tr.times.end(), t_a - tol);
    const auto hi = std::upper_bound(tr.times.begin(), tr.times.end(), t_b + tol);
    const std::size_t i0 = static_cast<std::size_t>(lo - tr.times.begin());
    const std::size_t i1 = static_cast<std::size_t>(hi - tr.times.begin());
    const std::size_t count = i1 - i0;
    if (count < 50) throw window_too_short("need at least 50 samples, have " + std::to_string(count));

    double r_sum = 0.0;
    for (std::size_t k = i0; k < i1; ++k) r_sum += std::abs(tr.eta1[k]);
    const double r_mean = r_sum / count;
    double r_var = 0.0;
    for (std::size_t k = i0; k < i1; ++k) {
        const double d = std::abs(tr.eta1[k]) - r_mean;
        r_var += d * d;
    }

    std::vector<double> phase(count);
    phase[0] = std::arg(tr.eta1[i0]);
    for (std::size_t k = 1; k < count; ++k)
        phase[k] = phase[k - 1] + std::arg(tr.eta1[i0 + k] * std::conj(tr.eta1[i0 + k - 1]));

    double t_mean = 0.0, p_mean = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        t_mean += tr.times[i0 + k];
        p_mean += phase[k];
    }
    t_mean /= count;
    p_mean /= count;
    double stt = 0.0, stp = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double dtk = tr.times[i0 + k] - t_mean;
        stt += dtk * dtk;
        stp += dtk * (phase[k] - p_mean);
    }
    const double slope = stp / stt;
    double sse = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double resid = phase[k] - p_mean - slope * (tr.times[i0 + k] - t_mean);
        sse += resid * resid;
    }
    const double stderr_slope = std::sqrt(std::max(0.0, sse / (count - 2)) / stt);
    return {r_mean, std::sqrt(r_var / count), slope, stderr_slope};
}

// Finite-grid echo time 2 pi / min-gap(w_m): phase mixing on a discrete
// frequency grid recurs there, so decay fits must end before ~0.8 of it.
inline double echo_time(std::vector<double> nodes) {
    if (nodes.size() < 2) throw config_error("echo_time requires at least two nodes");
    std::sort(nodes.begin(), nodes.end());
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < nodes.size(); ++i) min_gap = std::min(min_gap, nodes[i] - nodes[i - 1]);
    if (!(min_gap > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 * kd_pi / min_gap;
}

inline double echo_time(const galerkin_config& cfg) {
    return echo_time(cfg.model.sample(cfg.m_nodes, cfg.node_scheme));
}

struct log_fit {
    double slope;
    double intercept;
    std::size_t n_used;
};

// Least-squares fit of log(values) over t in [t_a, t_b]; nonpositive samples
// (underflowed decay tails) are skipped.
inline log_fit fit_log_slope(const std::vector<double>& times, const std::vector<double>& values,
                             double t_a, double t_b) {
    double t_sum = 0.0, l_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= t_a && times[k] <= t_b && values[k] > 0.0) {
            t_sum += times[k];
            l_sum += std::log(values[k]);
            ++n;
        }
    if (n < 2) throw window_too_short("log fit needs at least two positive samples in the window");
    const double t_mean = t_sum / n, l_mean = l_sum / n;
    double stt = 0.0, stl = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= t_a && times[k] <= t_b && values[k] > 0.0) {
            const double dtk = times[k] - t_mean;
            stt += dtk * dtk;
            stl += dtk * (std::log(values[k]) - l_mean);
        }
    const double slope = stl / stt;
    return {slope, l_mean - slope * t_mean, n};
}

inline log_fit fit_log_slope(const pairing_trace& tr, double t_a, double t_b) {
    std::vector<double> mags(tr.values.size());
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(tr.values[k]);
    return fit_log_slope(tr.times, mags, t_a, t_b);
}

inline log_fit fit_log_slope(const trace& tr, double t_a, double t_b) {
    std::vector<double> mags(tr.eta1.size());
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(tr.eta1[k]);
    return fit_log_slope(tr.times, mags, t_a, t_b);
}

}  // namespace kdaido
