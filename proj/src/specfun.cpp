#include "qscss/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qscss {

namespace {

using std::numbers::pi;
using cd = std::complex<double>;

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSeriesLimit = 1.5;
constexpr int kMaxIter = 2000;

// C(x) + i S(x) by power series, 0 <= x <= kSeriesLimit.
cd fresnel_series(double x) {
    const double fact = pi / 2.0 * x * x;
    double sum_c = x;
    double sum_s = 0.0;
    double term = x;
    double sign = 1.0;
    bool odd = true;
    int n = 3;
    double sum = 0.0;
    for (int k = 1; k <= kMaxIter; ++k) {
        term *= fact / k;
        sum += sign * term / n;
        const double test = std::abs(sum) * kEps;
        if (odd) {
            sign = -sign;
            sum_s = sum;
            sum = sum_c;
        } else {
            sum_c = sum;
            sum = sum_s;
        }
        if (term < test) break;
        odd = !odd;
        n += 2;
    }
    return {sum_c, sum_s};
}

// Auxiliary function for x > kSeriesLimit by the continued fraction of the
// complementary error function (modified Lentz).
cd fresnel_aux_cf(double x) {
    constexpr double tiny = 1e-300;
    const double pix2 = pi * x * x;
    cd b(1.0, -pix2);
    cd cc(1.0 / tiny, 0.0);
    cd d = 1.0 / b;
    cd h = d;
    int n = -1;
    for (int k = 2; k <= kMaxIter; ++k) {
        n += 2;
        const double a = -static_cast<double>(n) * (n + 1);
        b += 4.0;
        d = 1.0 / (a * d + b);
        cc = b + a / cc;
        const cd del = cc * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < kEps) break;
    }
    h *= cd(x, -x);
    return cd(0.5, 0.5) * h;
}

// sin(z) / z, accurate near zero.
double sinc(double z) {
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

// integral_0^L exp(j pi (c u^2 + 2 s u)) du for c > 0.
cd quad_phase_core(double c, double s, double length) {
    const double k = std::sqrt(2.0 * c);
    const double x0 = s * std::sqrt(2.0 / c);
    const double x1 = k * length + x0;
    const cd end_value = std::polar(1.0, pi * (c * length * length + 2.0 * s * length));
    cd j;
    if (x0 >= 0.0) {
        j = fresnel_aux(x0) - fresnel_aux(x1) * end_value;
    } else if (x1 <= 0.0) {
        j = fresnel_aux(-x1) * end_value - fresnel_aux(-x0);
    } else {
        // Stationary point inside the interval.
        j = cd(1.0, 1.0) * std::polar(1.0, -pi * s * s / c) - fresnel_aux(x1) * end_value -
            fresnel_aux(-x0);
    }
    return j / k;
}

}  // namespace

double erfi(double x) {
    if (!std::isfinite(x)) throw std::domain_error("erfi: argument must be finite");
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    // 2/sqrt(pi) * sum_k x^(2k+1) / (k! (2k+1)); every term is positive.
    const double x2 = ax * ax;
    double term = ax;
    double sum = ax;
    for (int k = 1; k < 100000; ++k) {
        term *= x2 / k;
        const double contrib = term / (2.0 * k + 1.0);
        sum += contrib;
        if (!std::isfinite(sum)) break;
        if (contrib < sum * kEps * 0.25 && static_cast<double>(k) > x2) break;
    }
    const double result = 2.0 / std::sqrt(pi) * sum;
    if (!std::isfinite(result)) {
        throw std::overflow_error("erfi: result overflows double for |x| = " + std::to_string(ax));
    }
    return x < 0.0 ? -result : result;
}

cd fresnel(double x) {
    const double ax = std::abs(x);
    cd value;
    if (ax <= kSeriesLimit) {
        value = fresnel_series(ax);
    } else {
        value = cd(0.5, 0.5) - fresnel_aux_cf(ax) * std::polar(1.0, pi * ax * ax / 2.0);
    }
    return x < 0.0 ? -value : value;
}

cd fresnel_aux(double x) {
    if (x < 0.0) throw std::domain_error("fresnel_aux: argument must be non-negative");
    if (x > kSeriesLimit) return fresnel_aux_cf(x);
    return (cd(0.5, 0.5) - fresnel_series(x)) * std::polar(1.0, -pi * x * x / 2.0);
}

cd quad_phase_integral(const QuadPhaseIntegral& q) {
    if (!(q.lower <= q.upper)) {
        throw std::invalid_argument("quad_phase_integral: lower must not exceed upper");
    }
    const double length = q.upper - q.lower;
    if (length == 0.0) return {0.0, 0.0};

    // Shift the origin to the lower limit.
    const double c = q.curvature;
    const double s = c * q.lower + q.slope;
    const cd origin = std::polar(1.0, 2.0 * pi * (0.5 * c * q.lower * q.lower + q.slope * q.lower));

    if (std::abs(c) * length * length < kCurvatureThreshold) {
        if (std::abs(s) * length < kSlopeThreshold) {
            return origin * length * std::polar(1.0, pi * s * length);
        }
        return origin * length * std::polar(1.0, pi * s * length) * sinc(pi * s * length);
    }
    const cd local = c > 0.0 ? quad_phase_core(c, s, length) : std::conj(quad_phase_core(-c, -s, length));
    return origin * local;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace qscss
