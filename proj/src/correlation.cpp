#include "qscss/correlation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qscss/detail/parallel.hpp"
#include "qscss/specfun.hpp"

namespace qscss {

namespace {

using std::numbers::pi;
using cd = std::complex<double>;

struct GaussLegendre {
    static constexpr int kOrder = 16;
    std::array<double, kOrder> node{};
    std::array<double, kOrder> weight{};

    GaussLegendre() {
        for (int i = 0; i < kOrder; ++i) {
            double x = std::cos(pi * (i + 0.75) / (kOrder + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (int n = 2; n <= kOrder; ++n) {
                    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            node[i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

const GaussLegendre& gauss_legendre() {
    static const GaussLegendre rule;
    return rule;
}

template <typename F>
cd integrate_panels(F&& f, double a, double b, int panels) {
    if (b <= a || panels <= 0) return {0.0, 0.0};
    const auto& gl = gauss_legendre();
    const double width = (b - a) / panels;
    cd total{0.0, 0.0};
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        cd panel{0.0, 0.0};
        for (int i = 0; i < GaussLegendre::kOrder; ++i) {
            panel += gl.weight[i] * f(mid + 0.5 * width * gl.node[i]);
        }
        total += 0.5 * width * panel;
    }
    return total;
}

// Normalized-time quadrature of s_m(tau) conj(s_k(tau - e)) over [0, 1).
cd quadrature_at(const PhaseFunction& fm, const PhaseFunction& fk, double e, int panels_per_symbol) {
    auto late = [&](double tau) { return std::polar(1.0, fm.phase_norm(tau) - fk.phase_norm(tau - e)); };
    auto early = [&](double tau) {
        return std::polar(1.0, fm.phase_norm(tau) - fk.phase_norm(tau + 1.0 - e));
    };
    const int late_panels = std::max(1, static_cast<int>(std::ceil((1.0 - e) * panels_per_symbol)));
    const int early_panels = e > 0.0 ? std::max(1, static_cast<int>(std::ceil(e * panels_per_symbol))) : 0;
    return integrate_panels(late, e, 1.0, late_panels) + integrate_panels(early, 0.0, e, early_panels);
}

void check_pair(const SignalSetSpec& spec, int m, int k) {
    spec.validate();
    for (int u : {m, k}) {
        if (u < 0 || u >= spec.n_users) {
            throw std::domain_error("user index " + std::to_string(u) + " outside [0, " +
                                    std::to_string(spec.n_users) + ")");
        }
    }
}

double checked_delay(const SignalSetSpec& spec, double eps) {
    if (!std::isfinite(eps)) throw std::domain_error("delay must be finite");
    if (eps < 0.0 || eps >= spec.symbol_duration) {
        throw std::domain_error("delay must lie in [0, T)");
    }
    return eps;
}

}  // namespace

CorrelationResult xcorr_quadrature(const SignalSetSpec& spec, int m, int k, double eps) {
    check_pair(spec, m, k);
    checked_delay(spec, eps);
    const PhaseFunction fm(spec, m);
    const PhaseFunction fk(spec, k);
    const double e = eps / spec.symbol_duration;
    // 16-point panels: 2N panels put 32N nodes per symbol, sixteen times
    // the 2N/T Nyquist rate of the set; the refinement doubles that.
    const int coarse = std::max(8, 2 * spec.n_users);
    const cd rough = quadrature_at(fm, fk, e, coarse);
    const cd fine = quadrature_at(fm, fk, e, 2 * coarse);

    CorrelationResult r;
    r.value = fine;
    r.method = CorrelationMethod::Quadrature;
    r.m = m;
    r.k = k;
    r.delay = eps;
    r.error_estimate = std::abs(fine - rough);
    return r;
}

CorrelationResult xcorr_linear_closed(const SignalSetSpec& spec, int m, int k, double eps) {
    check_pair(spec, m, k);
    if (spec.family != ChirpFamily::Linear) {
        throw std::invalid_argument("closed-form correlation requires the linear family");
    }
    checked_delay(spec, eps);
    const double T = spec.symbol_duration;
    const double N = spec.n_users;
    const double NT2 = N * T * T;
    const cd I(0.0, 1.0);
    const double threshold = 1e-9 * N * T;

    // Term over [eps, T): linear-phase integrand with rate -pi*d1/T^2 * 2.
    const double d1 = (k - m) * T - eps * N;
    cd first;
    if (std::abs(d1) >= threshold) {
        first = I * T * T / (2.0 * pi * d1) *
                (std::exp(-I * pi * d1 * (k * T + m * T - eps * N + 2.0 * N * T) / NT2) -
                 std::exp(-I * pi * (k * k * T * T - (m * T + eps * N) * (m * T + eps * N)) / NT2));
    } else {
        const double mid = 0.5 * (T + eps);
        first = (T - eps) * std::exp(-I * pi * d1 / (T * T) * (2.0 * mid + (m + k) * T / N - eps));
    }

    // Term over [0, eps): the wrapped tail of the delayed chirp.
    const double d2 = (k - m) * T + (T - eps) * N;
    cd second;
    if (std::abs(d2) >= threshold) {
        const double top = k * T + (T - eps) * N;
        second = I * T * T / (2.0 * pi * d2) *
                 (std::exp(-I * pi * d2 * (k * T + m * T + (T - eps) * N + 2.0 * N * eps) / NT2) -
                  std::exp(-I * pi * (top * top - m * m * T * T) / NT2));
    } else {
        const double mid = 0.5 * eps;
        second = eps * std::exp(-I * pi * d2 / (T * T) * (2.0 * mid + (m + k) * T / N + T - eps));
    }

    CorrelationResult r;
    r.value = (first + second) / T;
    r.method = CorrelationMethod::ClosedForm;
    r.m = m;
    r.k = k;
    r.delay = eps;
    return r;
}

std::size_t SegmentModel::piece_at(double t) const {
    if (start.empty()) throw std::logic_error("empty segment model");
    const auto it = std::upper_bound(start.begin(), start.end(), t);
    if (it == start.begin()) return 0;
    return static_cast<std::size_t>(it - start.begin()) - 1;
}

double SegmentModel::phase_cycles(double t) const {
    const std::size_t i = piece_at(t);
    return 0.5 * slope[i] * t * t + intercept[i] * t + phase[i];
}

double SegmentModel::frequency(double t) const {
    const std::size_t i = piece_at(t);
    return slope[i] * t + intercept[i];
}

namespace {

SegmentModel build_model(const PhaseFunction& fn, double eps, int segments) {
    if (segments < 1) throw std::domain_error("segment count must be >= 1");
    const SignalSetSpec& spec = fn.spec();
    const double T = spec.symbol_duration;
    const double width = T / segments;

    SegmentModel model;
    model.width = width;
    model.count = static_cast<std::size_t>(segments);

    // Piece boundaries: the grid, plus the wrap point when it falls strictly
    // inside a grid segment.
    const double split_tol = 1e-12 * T;
    for (int z = 0; z < segments; ++z) {
        const double lo = z * width;
        const double hi = (z + 1 == segments) ? T : (z + 1) * width;
        if (eps > lo + split_tol && eps < hi - split_tol) {
            model.start.insert(model.start.end(), {lo, eps});
            model.end.insert(model.end.end(), {eps, hi});
            model.grid_index.insert(model.grid_index.end(), {static_cast<std::size_t>(z),
                                                             static_cast<std::size_t>(z)});
        } else {
            model.start.push_back(lo);
            model.end.push_back(hi);
            model.grid_index.push_back(static_cast<std::size_t>(z));
        }
    }

    // Local time of the undelayed chirp seen at absolute time t.
    auto source_time = [&](double t) { return t >= eps ? t - eps : t + T - eps; };

    const std::size_t count = model.start.size();
    model.slope.resize(count);
    model.intercept.resize(count);
    model.phase.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double a = model.start[i];
        const double g = 0.5 * (a + model.end[i]);
        const double u = source_time(g);
        const double alpha = fn.rate(u);
        model.slope[i] = alpha;
        model.intercept[i] = fn.frequency(u) - alpha * g;

        const bool at_wrap = eps > 0.0 && std::abs(a - eps) <= split_tol;
        if (i == 0 || at_wrap) {
            const double target = fn.phase(at_wrap ? 0.0 : source_time(a)) / (2.0 * pi);
            model.phase[i] = target - (0.5 * alpha * a * a + model.intercept[i] * a);
        } else {
            // Continuity with the previous piece at the shared boundary.
            model.phase[i] = model.phase[i - 1] + 0.5 * (model.slope[i - 1] - alpha) * a * a +
                             (model.intercept[i - 1] - model.intercept[i]) * a;
        }
    }
    return model;
}

// Largest phase error of a model, in cycles, sampled at piece ends and midpoints.
double model_phase_error(const SegmentModel& model, const PhaseFunction& fn, double eps) {
    const double T = fn.spec().symbol_duration;
    auto source_time = [&](double t) { return t >= eps ? t - eps : t + T - eps; };
    double worst = 0.0;
    // Within a piece the source time is t minus a fixed offset.
    for (std::size_t i = 0; i < model.pieces(); ++i) {
        const double a = model.start[i];
        const double b = model.end[i];
        const double g = 0.5 * (a + b);
        const double offset = g - source_time(g);
        for (double t : {a, g, b}) {
            const double u = t - offset;
            const double model_phase = 0.5 * model.slope[i] * t * t + model.intercept[i] * t + model.phase[i];
            double diff = model_phase - fn.phase(u) / (2.0 * pi);
            diff -= std::round(diff);
            worst = std::max(worst, std::abs(diff));
        }
    }
    return worst;
}

}  // namespace

SegmentModel build_segment_model(const SignalSetSpec& spec, int m, int segments) {
    check_pair(spec, m, m);
    return build_model(PhaseFunction(spec, m), 0.0, segments);
}

SegmentModel build_delayed_segment_model(const SignalSetSpec& spec, int k, double eps, int segments) {
    check_pair(spec, k, k);
    checked_delay(spec, eps);
    return build_model(PhaseFunction(spec, k), eps, segments);
}

CorrelationResult xcorr_segmented(const SignalSetSpec& spec, int m, int k, double eps, int segments) {
    check_pair(spec, m, k);
    checked_delay(spec, eps);
    if (segments < 1) throw std::domain_error("segment count must be >= 1");
    const PhaseFunction fm(spec, m);
    const PhaseFunction fk(spec, k);
    const SegmentModel own = build_model(fm, 0.0, segments);
    const SegmentModel other = build_model(fk, eps, segments);

    cd sum{0.0, 0.0};
    for (std::size_t i = 0; i < other.pieces(); ++i) {
        const std::size_t z = other.grid_index[i];
        const QuadPhaseIntegral q{own.slope[z] - other.slope[i], own.intercept[z] - other.intercept[i],
                                  other.start[i], other.end[i]};
        const double dphi = own.phase[z] - other.phase[i];
        sum += std::polar(1.0, 2.0 * pi * (dphi - std::round(dphi))) * quad_phase_integral(q);
    }

    CorrelationResult r;
    r.value = sum / spec.symbol_duration;
    r.method = CorrelationMethod::Segmented;
    r.segments = segments;
    r.m = m;
    r.k = k;
    r.delay = eps;
    r.error_estimate = 2.0 * pi * (model_phase_error(own, fm, 0.0) + model_phase_error(other, fk, eps));
    return r;
}

CorrelationResult xcorr_auto(const SignalSetSpec& spec, int m, int k, double eps, int segments) {
    if (spec.family == ChirpFamily::Linear) return xcorr_linear_closed(spec, m, k, eps);
    return xcorr_segmented(spec, m, k, eps, segments);
}

CorrelationStats correlation_stats(const SignalSetSpec& spec, std::span<const double> delay_fractions,
                                   const StatsOptions& options) {
    spec.validate();
    if (options.bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
    for (double d : delay_fractions) {
        if (!(d >= 0.0 && d < 1.0)) throw std::domain_error("delay fractions must lie in [0, 1)");
    }
    const int n = spec.n_users;
    std::vector<std::pair<int, int>> pairs;
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            if (m != k) pairs.emplace_back(m, k);
        }
    }
    const std::size_t n_delays = delay_fractions.size();
    std::vector<double> magnitude(pairs.size() * n_delays, 0.0);
    detail::parallel_for(
        magnitude.size(),
        [&](std::size_t cell) {
            const auto [m, k] = pairs[cell / n_delays];
            const double eps = delay_fractions[cell % n_delays] * spec.symbol_duration;
            magnitude[cell] = std::abs(xcorr_auto(spec, m, k, eps, options.segments).value);
        },
        options.threads);

    CorrelationStats stats;
    stats.pairs = pairs.size();
    stats.delays.assign(delay_fractions.begin(), delay_fractions.end());
    stats.mean_abs.assign(n_delays, 0.0);
    stats.counts.assign(static_cast<std::size_t>(options.bins), 0);
    stats.bin_edges.resize(static_cast<std::size_t>(options.bins) + 1);
    for (int b = 0; b <= options.bins; ++b) stats.bin_edges[b] = static_cast<double>(b) / options.bins;

    for (std::size_t cell = 0; cell < magnitude.size(); ++cell) {
        const double v = magnitude[cell];
        stats.mean_abs[cell % n_delays] += v;
        auto bin = static_cast<std::ptrdiff_t>(std::floor(v * options.bins));
        bin = std::clamp<std::ptrdiff_t>(bin, 0, options.bins - 1);
        ++stats.counts[static_cast<std::size_t>(bin)];
    }
    if (!pairs.empty()) {
        for (double& v : stats.mean_abs) v /= static_cast<double>(pairs.size());
    }
    return stats;
}

CorrelationStats mean_xcorr_vs_delay(const SignalSetSpec& spec, std::span<const double> delay_fractions,
                                     const StatsOptions& options) {
    return correlation_stats(spec, delay_fractions, options);
}

CorrelationStats xcorr_histogram(const SignalSetSpec& spec, std::span<const double> delay_fractions, int bins,
                                 const StatsOptions& options) {
    StatsOptions opts = options;
    opts.bins = bins;
    return correlation_stats(spec, delay_fractions, opts);
}

double tail_fraction(const CorrelationStats& stats, double threshold) {
    const bool on_edge = std::any_of(stats.bin_edges.begin(), stats.bin_edges.end(),
                                     [&](double e) { return std::abs(e - threshold) <= 1e-12; });
    if (!on_edge) throw std::invalid_argument("tail_fraction threshold must be a histogram bin edge");
    std::size_t total = 0;
    std::size_t above = 0;
    for (std::size_t b = 0; b < stats.counts.size(); ++b) {
        total += stats.counts[b];
        if (stats.bin_edges[b] >= threshold - 1e-12) above += stats.counts[b];
    }
    return total == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(total);
}

}  // namespace qscss
