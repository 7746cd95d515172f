#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qscss/waveforms.hpp"

using namespace qscss;
using std::numbers::pi;

namespace {

SignalSetSpec make(ChirpFamily f, int n, double T = 1.0, int s = 0) {
    SignalSetSpec spec;
    spec.family = f;
    spec.n_users = n;
    spec.symbol_duration = T;
    spec.samples_per_symbol = s > 0 ? s : std::max(64, 8 * n);
    return spec;
}

const ChirpFamily kFamilies[] = {ChirpFamily::Linear, ChirpFamily::Sinusoidal, ChirpFamily::Quartic};

}  // namespace

TEST_CASE("spec validation") {
    CHECK_NOTHROW(make(ChirpFamily::Linear, 4, 1.0, 16).validate());
    CHECK_THROWS_AS(make(ChirpFamily::Linear, 4, 1.0, 15).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make(ChirpFamily::Linear, 0, 1.0, 64).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make(ChirpFamily::Linear, 2, 0.0, 64).validate(), std::invalid_argument);
    CHECK(make(ChirpFamily::Linear, 5, 2.0).bandwidth() == doctest::Approx(5.0));
}

TEST_CASE("family names round trip") {
    for (auto f : kFamilies) CHECK(parse_family(to_string(f)) == f);
    CHECK(parse_family("QUARTIC") == ChirpFamily::Quartic);
    CHECK(parse_family("sin") == ChirpFamily::Sinusoidal);
    CHECK_THROWS(parse_family("cubic"));
}

TEST_CASE("linear phase examples") {
    CHECK(chirp_phase(make(ChirpFamily::Linear, 1), 0, 0.0) == 0.0);
    CHECK(chirp_phase(make(ChirpFamily::Linear, 2), 1, 0.0) == doctest::Approx(pi / 2).epsilon(1e-15));
    const auto spec = make(ChirpFamily::Linear, 7, 3.0);
    const double t = 1.234;
    const double expected = pi * 7 / 9.0 * std::pow(t + 2 * 3.0 / 7, 2);
    CHECK(chirp_phase(spec, 2, t) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("quartic at m = N/2 is linear") {
    const auto q = make(ChirpFamily::Quartic, 10, 2.0);
    const auto l = make(ChirpFamily::Linear, 10, 2.0);
    for (double t : {0.0, 0.3, 1.1, 1.99}) {
        CHECK(chirp_phase(q, 5, t) == doctest::Approx(chirp_phase(l, 5, t)).epsilon(1e-15));
        CHECK(instantaneous_frequency(q, 5, t) == doctest::Approx(instantaneous_frequency(l, 5, t)));
    }
}

TEST_CASE("linear instantaneous frequency") {
    const auto spec = make(ChirpFamily::Linear, 10, 1.0);
    CHECK(instantaneous_frequency(spec, 3, 0.0) == doctest::Approx(3.0));
    CHECK(instantaneous_frequency(spec, 0, std::nextafter(1.0, 0.0)) == doctest::Approx(10.0));
    const auto spec2 = make(ChirpFamily::Linear, 8, 0.5);
    for (double t : {0.0, 0.1, 0.37}) {
        for (int m = 1; m < 8; ++m) {
            CHECK(instantaneous_frequency(spec2, m, t) - instantaneous_frequency(spec2, m - 1, t) ==
                  doctest::Approx(2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("phase derivative matches frequency") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (auto f : kFamilies) {
        const auto spec = make(f, 12, 2.5);
        for (int trial = 0; trial < 100; ++trial) {
            const int m = static_cast<int>(rng() % 12);
            const double t = u(rng) * spec.symbol_duration;
            const double dt = 1e-6 * spec.symbol_duration;
            const double num = (chirp_phase(spec, m, t + dt) - chirp_phase(spec, m, t - dt)) / (2 * dt) / (2 * pi);
            const double f_an = instantaneous_frequency(spec, m, t);
            CHECK(std::abs(num - f_an) <= 1e-6 * std::max(1.0, std::abs(f_an)));
            const double df = (instantaneous_frequency(spec, m, t + dt) - instantaneous_frequency(spec, m, t - dt)) / (2 * dt);
            CHECK(std::abs(df - chirp_rate(spec, m, t)) <= 1e-5 * std::max(1.0, std::abs(df)));
        }
    }
}

TEST_CASE("quartic reflection symmetry") {
    const auto q = make(ChirpFamily::Quartic, 10, 1.0);
    const auto l = make(ChirpFamily::Linear, 10, 1.0);
    for (int m = 1; m < 5; ++m) {
        for (double t : {0.05, 0.3, 0.5, 0.81}) {
            const double dev_m = instantaneous_frequency(q, m, t) - instantaneous_frequency(l, m, t);
            const double dev_r = instantaneous_frequency(q, 10 - m, 1.0 - t) - instantaneous_frequency(l, 10 - m, 1.0 - t);
            CHECK(dev_m == doctest::Approx(-dev_r).epsilon(1e-12));
        }
    }
}

TEST_CASE("sinusoidal deviation vanishes at the symbol start") {
    const auto spec = make(ChirpFamily::Sinusoidal, 6, 1.0);
    for (int m = 0; m < 6; ++m) CHECK(instantaneous_frequency(spec, m, 0.0) == doctest::Approx(m).epsilon(1e-12));
}

TEST_CASE("argument checks") {
    const auto spec = make(ChirpFamily::Linear, 4);
    CHECK_THROWS_AS(chirp_phase(spec, 4, 0.0), std::domain_error);
    CHECK_THROWS_AS(chirp_phase(spec, -1, 0.0), std::domain_error);
    CHECK_THROWS_AS(chirp_phase(spec, 0, 1.0), std::domain_error);
    CHECK_THROWS_AS(instantaneous_frequency(spec, 0, -0.1), std::domain_error);
    CHECK_THROWS_AS(synthesize(spec, 9), std::domain_error);
}

TEST_CASE("synthesis is unit envelope with energy T") {
    for (auto f : kFamilies) {
        const auto spec = make(f, 9, 1.7, 200);
        for (int m = 0; m < 9; ++m) {
            const ChirpWaveform w = synthesize(spec, m);
            REQUIRE(w.samples.size() == 200);
            double energy = 0.0;
            for (const auto& s : w.samples) {
                CHECK(std::abs(std::abs(s) - 1.0) <= 1e-12);
                energy += std::norm(s);
            }
            CHECK(energy * spec.sample_interval() == doctest::Approx(spec.symbol_duration).epsilon(1e-12));
        }
    }
    const ChirpWaveform w = synthesize(make(ChirpFamily::Linear, 1), 0);
    CHECK(w.samples[0] == std::complex<double>(1.0, 0.0));
}

TEST_CASE("synthesis matches the phase function on the grid") {
    const auto spec = make(ChirpFamily::Sinusoidal, 5, 1.0, 100);
    const ChirpWaveform w = synthesize(spec, 3);
    for (int i = 0; i < 100; i += 7) {
        const auto expected = std::polar(1.0, chirp_phase(spec, 3, i * spec.sample_interval()));
        CHECK(std::abs(w.samples[i] - expected) < 1e-12);
    }
}

TEST_CASE("delayed waveform") {
    const auto spec = make(ChirpFamily::Linear, 4, 1.0, 64);
    const ChirpWaveform w = synthesize(spec, 1);
    CHECK(delayed(w, 0.0).samples == w.samples);
    CHECK(delayed(w, 1.0).samples == w.samples);
    CHECK_THROWS_AS(delayed(w, -0.1), std::domain_error);

    // At t = 0 the wrapped branch evaluates the chirp at t + T - eps.
    const ChirpWaveform d = delayed(w, 0.25);
    const auto expected = std::polar(1.0, chirp_phase(spec, 1, 0.75));
    CHECK(std::abs(d.samples[0] - expected) < 1e-12);
    CHECK(d.applied_delay == doctest::Approx(0.25));
    CHECK(d.delay_residual == doctest::Approx(0.0));

    const ChirpWaveform r = delayed(w, 0.1);
    CHECK(std::abs(r.delay_residual) <= spec.sample_interval() / 2);
    CHECK(r.applied_delay + r.delay_residual == doctest::Approx(0.1));
}

TEST_CASE("delay composition on the grid") {
    const auto spec = make(ChirpFamily::Quartic, 6, 1.0, 96);
    const ChirpWaveform w = synthesize(spec, 2);
    const double h = spec.sample_interval();
    for (auto [a, b] : {std::pair{5, 17}, std::pair{60, 70}, std::pair{0, 95}}) {
        const ChirpWaveform twice = delayed(delayed(w, a * h), b * h);
        const ChirpWaveform once = delayed(w, std::fmod((a + b) * h, 1.0));
        CHECK(twice.samples == once.samples);
    }
}

TEST_CASE("wrap_delay") {
    CHECK(wrap_delay(1.25, 1.0) == doctest::Approx(0.25));
    CHECK(wrap_delay(-0.25, 1.0) == doctest::Approx(0.75));
    CHECK(wrap_delay(2.0, 1.0) == 0.0);
}
