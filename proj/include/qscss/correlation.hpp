#pragma once

// Normalized cross-correlation between user m's chirp and user k's chirp
// delayed by eps (cyclic wrap within the symbol):
//
//   rho_mk(eps) = 1/T * integral_0^T s_m(t) conj(s_k(t - eps)) dt.
//
// Three evaluation routes are provided: composite Gauss-Legendre quadrature
// (the reference), the two-term closed form for linear chirps, and the
// tangent-segment approximation for arbitrary families.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qscss/waveforms.hpp"

namespace qscss {

enum class CorrelationMethod { ClosedForm, Segmented, Quadrature };

struct CorrelationResult {
    std::complex<double> value;
    CorrelationMethod method = CorrelationMethod::Quadrature;
    int segments = 0;  // segment count for the segmented method
    int m = 0;
    int k = 0;
    double delay = 0.0;  // seconds, in [0, T)
    double error_estimate = 0.0;
};

CorrelationResult xcorr_quadrature(const SignalSetSpec& spec, int m, int k, double eps);

// Throws std::invalid_argument unless spec.family is Linear.
CorrelationResult xcorr_linear_closed(const SignalSetSpec& spec, int m, int k, double eps);

// Piecewise-linear time-frequency model of a (possibly delayed) chirp. On
// piece i the phase in cycles is slope/2 t^2 + intercept t + phase, with t
// the absolute time in the symbol.
struct SegmentModel {
    double width = 0.0;  // grid segment width
    std::size_t count = 0;  // grid segments M
    std::vector<double> start;
    std::vector<double> end;
    std::vector<double> slope;      // Hz/s
    std::vector<double> intercept;  // Hz
    std::vector<double> phase;      // cycles
    std::vector<std::size_t> grid_index;  // grid segment holding each piece

    std::size_t pieces() const { return start.size(); }
    std::size_t piece_at(double t) const;
    double phase_cycles(double t) const;
    double frequency(double t) const;
};

inline constexpr int kDefaultSegments = 1024;

SegmentModel build_segment_model(const SignalSetSpec& spec, int m, int segments);

// Segment model of user k's chirp delayed by eps, on the same grid as the
// undelayed model; the grid segment holding the wrap point is split there.
SegmentModel build_delayed_segment_model(const SignalSetSpec& spec, int k, double eps, int segments);

CorrelationResult xcorr_segmented(const SignalSetSpec& spec, int m, int k, double eps, int segments);

// Closed form for Linear, segmented otherwise.
CorrelationResult xcorr_auto(const SignalSetSpec& spec, int m, int k, double eps,
                             int segments = kDefaultSegments);

struct CorrelationStats {
    std::vector<double> delays;         // fractions of T
    std::vector<double> mean_abs;       // per delay, over ordered pairs m != k
    std::vector<double> bin_edges;      // bins + 1 uniform edges on [0, 1]
    std::vector<std::size_t> counts;    // |rho| over all (pair, delay) samples
    std::size_t pairs = 0;
};

struct StatsOptions {
    int segments = kDefaultSegments;
    int bins = 20;
    unsigned threads = 0;  // 0: hardware concurrency
};

CorrelationStats mean_xcorr_vs_delay(const SignalSetSpec& spec, std::span<const double> delay_fractions,
                                     const StatsOptions& options = {});

CorrelationStats xcorr_histogram(const SignalSetSpec& spec, std::span<const double> delay_fractions,
                                 int bins, const StatsOptions& options = {});

// Both statistics from one sweep.
CorrelationStats correlation_stats(const SignalSetSpec& spec, std::span<const double> delay_fractions,
                                   const StatsOptions& options = {});

// Fraction of histogram mass strictly above a bin edge (edge must be a bin edge).
double tail_fraction(const CorrelationStats& stats, double threshold);

}  // namespace qscss
