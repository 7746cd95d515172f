#pragma once

// Special functions behind the segment correlation method: the imaginary
// error function, Fresnel integrals, and the quadratic-phase integral
//
//   I = integral_{lower}^{upper} exp(j 2 pi (curvature/2 t^2 + slope t)) dt.
//
// The quadratic-phase integral is the erfi-of-complex-argument kernel of the
// segment sum; it is evaluated through Fresnel auxiliary functions so the
// e^{x^2} growth of erfi never appears.

#include <complex>

namespace qscss {

// Below this |curvature| * (upper - lower)^2 the quadratic term is dropped.
inline constexpr double kCurvatureThreshold = 1e-9;
// Below this |slope| * (upper - lower) the linear-phase factor is evaluated
// by its Taylor expansion.
inline constexpr double kSlopeThreshold = 1e-12;

// erfi(x) = -i erf(ix) = 2/sqrt(pi) * integral_0^x e^{s^2} ds.
// Throws std::overflow_error once the result leaves the double range
// (|x| above roughly 26.6).
double erfi(double x);

// Fresnel integrals C(x) + i S(x), with C(x) = integral_0^x cos(pi s^2 / 2) ds.
std::complex<double> fresnel(double x);

// Auxiliary function A(x) = g(x) + i f(x) for x >= 0, defined by
// C(x) + i S(x) = (1 + i)/2 - A(x) exp(i pi x^2 / 2).
std::complex<double> fresnel_aux(double x);

struct QuadPhaseIntegral {
    double curvature = 0.0;  // Hz/s
    double slope = 0.0;      // Hz
    double lower = 0.0;      // s
    double upper = 0.0;      // s
};

std::complex<double> quad_phase_integral(const QuadPhaseIntegral& q);

// Gaussian tail probability, Q(x) = 0.5 erfc(x / sqrt(2)).
double q_function(double x);

}  // namespace qscss
