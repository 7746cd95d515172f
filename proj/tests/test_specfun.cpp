#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qscss/specfun.hpp"

using namespace qscss;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

// Adaptive Gauss-Kronrod integral of exp(j 2 pi (c/2 t^2 + s t)) over [a, b].
cd oracle(double c, double s, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    auto re = [&](double t) { return std::cos(2 * pi * (0.5 * c * t * t + s * t)); };
    auto im = [&](double t) { return std::sin(2 * pi * (0.5 * c * t * t + s * t)); };
    return {gauss_kronrod<double, 61>::integrate(re, a, b, 10, 1e-12),
            gauss_kronrod<double, 61>::integrate(im, a, b, 10, 1e-12)};
}

cd qpi(double c, double s, double a, double b) { return quad_phase_integral({c, s, a, b}); }

}  // namespace

TEST_CASE("erfi values") {
    CHECK(erfi(0.0) == 0.0);
    CHECK(std::abs(erfi(1.0) - 1.650425758797543) < 1e-10);
    CHECK(erfi(0.5) == doctest::Approx(0.6149520946965110).epsilon(1e-13));
    CHECK(erfi(2.0) == doctest::Approx(18.56480241457555).epsilon(1e-13));
    CHECK(erfi(6.0) == doctest::Approx(4.112751455828239e14).epsilon(1e-10));
    for (double x : {0.1, 0.7, 1.9, 3.3, 5.5}) CHECK(erfi(-x) == -erfi(x));
}

TEST_CASE("erfi overflow is reported") {
    CHECK_NOTHROW(erfi(26.0));
    CHECK_THROWS_AS(erfi(27.0), std::overflow_error);
    CHECK_THROWS_AS(erfi(std::nan("")), std::domain_error);
}

TEST_CASE("fresnel integrals against quadrature") {
    using boost::math::quadrature::gauss_kronrod;
    for (double x : {0.0, 0.3, 1.0, 1.49, 1.51, 2.5, 4.0, 9.0}) {
        const double c = gauss_kronrod<double, 61>::integrate([](double s) { return std::cos(pi * s * s / 2); }, 0.0,
                                                              x, 20, 1e-14);
        const double s = gauss_kronrod<double, 61>::integrate([](double u) { return std::sin(pi * u * u / 2); }, 0.0,
                                                              x, 20, 1e-14);
        const cd f = fresnel(x);
        CHECK(std::abs(f.real() - c) < 1e-12);
        CHECK(std::abs(f.imag() - s) < 1e-12);
        CHECK(fresnel(-x) == -f);
    }
    CHECK(std::abs(fresnel(1e6) - cd(0.5, 0.5)) < 1e-6);
    CHECK_THROWS_AS(fresnel_aux(-1.0), std::domain_error);
}

TEST_CASE("quad_phase_integral degenerate cases") {
    CHECK(qpi(0, 0, 0.2, 0.9) == cd(0.7, 0.0));
    const double g = 3.7;
    const cd expected = (std::polar(1.0, 2 * pi * g * 0.8) - std::polar(1.0, 2 * pi * g * 0.1)) / cd(0, 2 * pi * g);
    CHECK(std::abs(qpi(0, g, 0.1, 0.8) - expected) < 1e-14);
    CHECK(qpi(5, 2, 0.4, 0.4) == cd(0, 0));
    CHECK_THROWS_AS(qpi(1, 0, 0.5, 0.4), std::invalid_argument);
}

TEST_CASE("quad_phase_integral unit curvature") {
    CHECK(std::abs(qpi(1, 0, 0, 1) - oracle(1, 0, 0, 1)) < 1e-8);
}

TEST_CASE("quad_phase_integral matches adaptive quadrature on random inputs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-50.0, 50.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        const double c = coef(rng);
        const double s = coef(rng);
        double a = unit(rng);
        double b = unit(rng);
        if (a > b) std::swap(a, b);
        worst = std::max(worst, std::abs(qpi(c, s, a, b) - oracle(c, s, a, b)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("quad_phase_integral near the curvature threshold") {
    for (double c : {1e-12, 1e-10, 2e-9, 1e-8, 1e-6}) {
        for (double s : {0.0, 1e-13, 0.3, -4.0}) {
            CHECK(std::abs(qpi(c, s, 0.1, 0.9) - oracle(c, s, 0.1, 0.9)) < 1e-9);
        }
    }
}

TEST_CASE("quad_phase_integral properties") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coef(-30.0, 30.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double c = coef(rng);
        const double s = coef(rng);
        double pts[3] = {unit(rng), unit(rng), unit(rng)};
        std::sort(pts, pts + 3);
        const cd whole = qpi(c, s, pts[0], pts[2]);
        CHECK(std::abs(qpi(-c, -s, pts[0], pts[2]) - std::conj(whole)) < 1e-12);
        CHECK(std::abs(whole - qpi(c, s, pts[0], pts[1]) - qpi(c, s, pts[1], pts[2])) < 1e-10);
        CHECK(std::abs(whole) <= pts[2] - pts[0] + 1e-12);
    }
}

TEST_CASE("q_function") {
    CHECK(q_function(0.0) == 0.5);
    CHECK(q_function(2.0) == doctest::Approx(0.02275013194817921).epsilon(1e-12));
    CHECK(q_function(5.0) == doctest::Approx(2.866515718791939e-7).epsilon(1e-12));
    double prev = 1.0;
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        CHECK(q_function(x) + q_function(-x) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(q_function(x) < prev);
        prev = q_function(x);
    }
}
