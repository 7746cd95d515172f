#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "qscss/correlation.hpp"

using namespace qscss;
using cd = std::complex<double>;

namespace {

SignalSetSpec make(ChirpFamily f, int n, double T = 1.0) {
    SignalSetSpec spec;
    spec.family = f;
    spec.n_users = n;
    spec.symbol_duration = T;
    spec.samples_per_symbol = std::max(64, 16 * n);
    return spec;
}

const ChirpFamily kFamilies[] = {ChirpFamily::Linear, ChirpFamily::Sinusoidal, ChirpFamily::Quartic};

}  // namespace

TEST_CASE("quadrature self correlation and linear nulls") {
    for (auto f : kFamilies) {
        const auto spec = make(f, 8, 2.0);
        for (int m = 0; m < 8; ++m) CHECK(std::abs(xcorr_quadrature(spec, m, m, 0.0).value - cd(1, 0)) < 1e-12);
    }
    const auto lin = make(ChirpFamily::Linear, 10);
    for (int m = 0; m < 10; ++m) {
        for (int k = 0; k < 10; ++k) {
            if (m != k) CHECK(std::abs(xcorr_quadrature(lin, m, k, 0.0).value) <= 1e-9);
        }
    }
}

TEST_CASE("quadrature result metadata") {
    const auto spec = make(ChirpFamily::Sinusoidal, 6, 0.5);
    const CorrelationResult r = xcorr_quadrature(spec, 1, 4, 0.1);
    CHECK(r.method == CorrelationMethod::Quadrature);
    CHECK(r.m == 1);
    CHECK(r.k == 4);
    CHECK(r.delay == doctest::Approx(0.1));
    CHECK(r.error_estimate < 1e-10);
    CHECK(std::abs(r.value) <= 1.0 + 1e-9);
}

TEST_CASE("closed form matches quadrature") {
    const auto spec = make(ChirpFamily::Linear, 25);
    const CorrelationResult c = xcorr_linear_closed(spec, 0, 1, 0.3);
    const CorrelationResult q = xcorr_quadrature(spec, 0, 1, 0.3);
    CHECK(c.method == CorrelationMethod::ClosedForm);
    CHECK(std::abs(c.value - q.value) < 1e-6);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 20);
        const auto s = make(ChirpFamily::Linear, n, 0.7);
        const int m = static_cast<int>(rng() % n);
        const int k = static_cast<int>(rng() % n);
        const double eps = std::uniform_real_distribution<double>(0.0, 0.7)(rng);
        CHECK(std::abs(xcorr_linear_closed(s, m, k, eps).value - xcorr_quadrature(s, m, k, eps).value) < 1e-6);
    }
}

TEST_CASE("closed form degenerate delays") {
    const int n = 10;
    const auto spec = make(ChirpFamily::Linear, n);
    for (int m = 0; m < n; ++m) {
        for (int k = m + 1; k < n; ++k) {
            const double eps = static_cast<double>(k - m) / n;
            const cd c = xcorr_linear_closed(spec, m, k, eps).value;
            CHECK(std::abs(c - xcorr_quadrature(spec, m, k, eps).value) < 1e-6);
            CHECK(std::abs(c) == doctest::Approx(1.0 - eps).epsilon(1e-9));
            // Just off the degenerate point the quotient branch takes over.
            CHECK(std::abs(xcorr_linear_closed(spec, m, k, eps + 1e-7).value - c) < 1e-5);
        }
    }
    CHECK(std::abs(xcorr_linear_closed(spec, 3, 7, 0.0).value) < 1e-12);
}

TEST_CASE("closed form rejects nonlinear families") {
    CHECK_THROWS_AS(xcorr_linear_closed(make(ChirpFamily::Quartic, 4), 0, 1, 0.2), std::invalid_argument);
}

TEST_CASE("Hermitian pair symmetry") {
    for (auto f : kFamilies) {
        const auto spec = make(f, 7);
        for (double eps : {0.05, 0.3, 0.77}) {
            const cd a = xcorr_quadrature(spec, 1, 5, eps).value;
            const cd b = xcorr_quadrature(spec, 5, 1, 1.0 - eps).value;
            CHECK(std::abs(a - std::conj(b)) < 1e-9);
        }
    }
}

TEST_CASE("segment model of a linear chirp is exact") {
    const int n = 6;
    const auto spec = make(ChirpFamily::Linear, n, 2.0);
    for (int segments : {1, 7, 64}) {
        const SegmentModel sm = build_segment_model(spec, 4, segments);
        CHECK(sm.count == static_cast<std::size_t>(segments));
        for (std::size_t i = 0; i < sm.pieces(); ++i) {
            CHECK(sm.slope[i] == doctest::Approx(n / 4.0));
            CHECK(sm.intercept[i] == doctest::Approx(4 / 2.0));
        }
        for (double t : {0.0, 0.31, 1.5, 1.999}) {
            CHECK(sm.phase_cycles(t) * 2 * std::numbers::pi == doctest::Approx(chirp_phase(spec, 4, t)).epsilon(1e-12));
        }
    }
    CHECK(build_segment_model(make(ChirpFamily::Linear, 6, 1.0), 2, 8).phase_cycles(0.0) ==
          doctest::Approx(4.0 / 12.0));
    CHECK_THROWS_AS(build_segment_model(spec, 0, 0), std::domain_error);
}

TEST_CASE("segment model phase accuracy and continuity") {
    for (auto f : {ChirpFamily::Sinusoidal, ChirpFamily::Quartic}) {
        const auto spec = make(f, 10);
        for (int m : {0, 3, 7}) {
            const SegmentModel sm = build_segment_model(spec, m, 1024);
            double worst = 0.0;
            for (int i = 0; i <= 5000; ++i) {
                const double t = std::min(i / 5000.0, std::nextafter(1.0, 0.0));
                worst = std::max(worst, std::abs(sm.phase_cycles(t) - chirp_phase(spec, m, t) / (2 * std::numbers::pi)));
            }
            CHECK(worst <= 1e-4);
            for (std::size_t i = 1; i < sm.pieces(); ++i) {
                const double b = sm.start[i];
                const double left = 0.5 * sm.slope[i - 1] * b * b + sm.intercept[i - 1] * b + sm.phase[i - 1];
                const double right = 0.5 * sm.slope[i] * b * b + sm.intercept[i] * b + sm.phase[i];
                CHECK(std::abs(left - right) < 1e-9);
            }
        }
    }
}

TEST_CASE("delayed segment model splits at the wrap point") {
    const auto spec = make(ChirpFamily::Quartic, 8);
    const double eps = 0.123;
    const SegmentModel sm = build_delayed_segment_model(spec, 2, eps, 16);
    CHECK(sm.pieces() == 17);
    bool found = false;
    for (std::size_t i = 0; i < sm.pieces(); ++i) found = found || std::abs(sm.start[i] - eps) < 1e-15;
    CHECK(found);
    for (double t : {0.01, 0.2, 0.6, 0.95}) {
        const double src = t >= eps ? t - eps : t + 1.0 - eps;
        const double exact = chirp_phase(spec, 2, src) / (2 * std::numbers::pi);
        const double d = sm.phase_cycles(t) - exact;
        CHECK(std::abs(d - std::round(d)) < 5e-3);
    }
}

TEST_CASE("segmented equals closed form for linear chirps") {
    const auto spec = make(ChirpFamily::Linear, 9);
    for (int segments : {1, 3, 50}) {
        for (double eps : {0.0, 0.13, 0.5, 0.91}) {
            const CorrelationResult s = xcorr_segmented(spec, 2, 6, eps, segments);
            CHECK(s.method == CorrelationMethod::Segmented);
            CHECK(s.segments == segments);
            CHECK(std::abs(s.value - xcorr_linear_closed(spec, 2, 6, eps).value) < 1e-9);
        }
    }
}

TEST_CASE("segmented self correlation") {
    for (auto f : kFamilies) CHECK(std::abs(xcorr_segmented(make(f, 12), 4, 4, 0.0, 256).value - cd(1, 0)) < 1e-9);
}

TEST_CASE("segmented convergence for the sinusoidal pair") {
    const auto spec = make(ChirpFamily::Sinusoidal, 15);
    const cd ref = xcorr_quadrature(spec, 2, 5, 0.2).value;
    double prev = 1e9;
    for (int segments : {8, 32, 128, 512, 2048}) {
        const CorrelationResult r = xcorr_segmented(spec, 2, 5, 0.2, segments);
        const double err = std::abs(r.value - ref);
        CHECK(err < prev);
        CHECK(r.error_estimate >= err * 0.5);
        prev = err;
    }
    CHECK(prev <= 1e-3);
}

TEST_CASE("segmented agrees with quadrature on random tuples") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const auto f = kFamilies[rng() % 3];
        const int n = 2 + static_cast<int>(rng() % 29);
        const auto spec = make(f, n);
        const int m = static_cast<int>(rng() % n);
        const int k = static_cast<int>(rng() % n);
        const double eps = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const cd q = xcorr_quadrature(spec, m, k, eps).value;
        CHECK(std::abs(xcorr_segmented(spec, m, k, eps, 2048).value - q) <= 1e-3);
        CHECK(std::abs(xcorr_auto(spec, m, k, eps).value) <= 1.0 + 1e-9);
    }
}

TEST_CASE("xcorr_auto picks the method by family") {
    CHECK(xcorr_auto(make(ChirpFamily::Linear, 4), 0, 1, 0.2).method == CorrelationMethod::ClosedForm);
    const CorrelationResult r = xcorr_auto(make(ChirpFamily::Quartic, 4), 0, 1, 0.2);
    CHECK(r.method == CorrelationMethod::Segmented);
    CHECK(r.segments == kDefaultSegments);
}

TEST_CASE("correlation statistics") {
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(i / 20.0);
    StatsOptions opts;
    opts.segments = 256;
    opts.bins = 10;
    for (auto f : kFamilies) {
        const auto spec = make(f, 6);
        const CorrelationStats st = correlation_stats(spec, grid, opts);
        CHECK(st.pairs == 30);
        REQUIRE(st.mean_abs.size() == grid.size());
        REQUIRE(st.bin_edges.size() == 11);
        CHECK(st.bin_edges.front() == 0.0);
        CHECK(st.bin_edges.back() == 1.0);
        CHECK(std::accumulate(st.counts.begin(), st.counts.end(), std::size_t{0}) == 30 * grid.size());
        for (double v : st.mean_abs) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            CHECK(std::abs(st.mean_abs[i] - st.mean_abs[grid.size() - i]) < 2e-3);
        }
        CHECK(tail_fraction(st, 0.0) == doctest::Approx(1.0));
        CHECK(tail_fraction(st, 1.0) == 0.0);
        CHECK_THROWS(tail_fraction(st, 0.55));
        if (f == ChirpFamily::Linear) CHECK(st.mean_abs[0] <= 1e-9);
    }
}

TEST_CASE("single-statistic sweeps agree with the combined sweep") {
    const auto spec = make(ChirpFamily::Quartic, 5);
    const std::vector<double> grid{0.0, 0.1, 0.4};
    StatsOptions opts;
    opts.segments = 128;
    opts.threads = 1;
    const CorrelationStats both = correlation_stats(spec, grid, opts);
    opts.threads = 3;
    const CorrelationStats mean = mean_xcorr_vs_delay(spec, grid, opts);
    const CorrelationStats hist = xcorr_histogram(spec, grid, 20, opts);
    CHECK(mean.mean_abs == both.mean_abs);
    CHECK(hist.counts == both.counts);
}
