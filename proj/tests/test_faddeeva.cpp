#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "kdaido/faddeeva.hpp"
#include "kdaido/quadrature.hpp"

using kdaido::faddeeva_w;
using kdaido::faddeeva_w_prime;
using cd = std::complex<double>;

namespace {
constexpr double pi = 3.14159265358979323846;

// Reference values computed with an independent high-accuracy implementation.
struct ref {
    cd z;
    cd w;
};
const ref references[] = {
    {{0.3, 0.0}, {9.1393118527122819e-01, 3.1891568277156590e-01}},
    {{1.5, 0.0}, {1.0539922456186433e-01, 4.8322733014076907e-01}},
    {{0.5, 0.3}, {6.1485153914699109e-01, 3.0312434964735102e-01}},
    {{3.0, 2.0}, {9.2710766426443436e-02, 1.2831696222826169e-01}},
    {{-2.0, 0.5}, {1.0335882374136668e-01, -2.8478588475009387e-01}},
    {{6.0, 7.0}, {4.6646495363137717e-02, 3.9516922497262644e-02}},
    {{0.0, 1.0}, {4.2758357615580700e-01, 0.0}},
    {{0.5, -0.3}, {1.0133165720153521e+00, 8.0677576688829444e-01}},
    {{-3.0, -2.0}, {-8.1339079928627461e-02, -1.2108616246299858e-01}},
    {{12.0, -1.5}, {-5.8456666007656666e-03, 4.6442352177781983e-02}},
    {{0.01, 0.02}, {9.7773087827669491e-01, 1.0891947677851585e-02}},
};
} // namespace

TEST_CASE("reference values across all evaluation regimes") {
    for (const auto& r : references) {
        cd got = faddeeva_w(r.z);
        INFO("z = ", r.z.real(), " + ", r.z.imag(), "i");
        CHECK(std::abs(got - r.w) <= 1e-12 * std::abs(r.w));
    }
    // Far real axis: the imaginary part carries everything that matters.
    CHECK(faddeeva_w(cd{25.0, 0.0}).imag() ==
          doctest::Approx(2.2585680912640450e-02).epsilon(1e-12));
}

TEST_CASE("quadrature oracle: w(z) = (i/pi) Integral exp(-t^2)/(z - t) dt, Im z > 0") {
    for (cd z : {cd{0.4, 0.6}, cd{2.5, 0.2}, cd{4.0, 3.0}, cd{-1.2, 1.1}}) {
        cd oracle = cd{0.0, 1.0 / pi} *
                    kdaido::quad::integrate_real_line(
                        [z](double t) { return std::exp(-t * t) / (z - t); }, 1.0);
        CHECK(std::abs(faddeeva_w(z) - oracle) < 1e-11);
    }
}

TEST_CASE("symmetries and the defining ODE") {
    for (cd z : {cd{0.7, 0.4}, cd{3.3, 1.1}, cd{1.0, -0.5}}) {
        // w(-conj z) = conj w(z)
        cd lhs = faddeeva_w(cd{-z.real(), z.imag()});
        cd rhs = std::conj(faddeeva_w(z));
        CHECK(std::abs(lhs - rhs) < 1e-13 * (1 + std::abs(rhs)));
        // reflection w(z) + w(-z) = 2 exp(-z^2)
        cd sum = faddeeva_w(z) + faddeeva_w(-z);
        CHECK(std::abs(sum - 2.0 * std::exp(-z * z)) < 1e-12 * std::abs(sum));
        // w' = -2 z w + 2i/sqrt(pi), cross-checked by central differences
        cd hstep{1e-6, 0.0};
        cd fd = (faddeeva_w(z + hstep) - faddeeva_w(z - hstep)) / (2.0 * hstep);
        CHECK(std::abs(faddeeva_w_prime(z) - fd) < 1e-7);
    }
}

TEST_CASE("real axis: Re w(x) = exp(-x^2), Im odd") {
    for (double x : {0.2, 1.0, 3.1, 6.9, 8.0}) {
        cd w = faddeeva_w(cd{x, 0.0});
        CHECK(w.real() == doctest::Approx(std::exp(-x * x)).epsilon(1e-11));
        CHECK(faddeeva_w(cd{-x, 0.0}).imag() == doctest::Approx(-w.imag()).epsilon(1e-12));
    }
}
