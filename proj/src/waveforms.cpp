#include "qscss/waveforms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qscss {

namespace {

using std::numbers::pi;

void check_user(const SignalSetSpec& spec, int m) {
    if (m < 0 || m >= spec.n_users) {
        throw std::domain_error("user index " + std::to_string(m) + " outside [0, " +
                                std::to_string(spec.n_users) + ")");
    }
}

void check_time(const SignalSetSpec& spec, double t) {
    if (!(t >= 0.0 && t < spec.symbol_duration)) {
        throw std::domain_error("time " + std::to_string(t) + " outside [0, T)");
    }
}

}  // namespace

std::string_view to_string(ChirpFamily family) {
    switch (family) {
    case ChirpFamily::Linear: return "linear";
    case ChirpFamily::Sinusoidal: return "sinusoidal";
    case ChirpFamily::Quartic: return "quartic";
    }
    return "unknown";
}

ChirpFamily parse_family(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "linear") return ChirpFamily::Linear;
    if (lower == "sinusoidal" || lower == "sin") return ChirpFamily::Sinusoidal;
    if (lower == "quartic") return ChirpFamily::Quartic;
    throw std::invalid_argument("unknown chirp family '" + std::string(name) + "'");
}

void SignalSetSpec::validate() const {
    if (n_users < 1) throw std::invalid_argument("n_users must be >= 1");
    if (!(symbol_duration > 0.0) || !std::isfinite(symbol_duration)) {
        throw std::invalid_argument("symbol_duration must be positive and finite");
    }
    if (samples_per_symbol < 4 * n_users) {
        throw std::invalid_argument("samples_per_symbol must be >= 4 * n_users (" +
                                    std::to_string(4 * n_users) + ")");
    }
}

PhaseFunction::PhaseFunction(const SignalSetSpec& spec, int user) : spec_(spec), user_(user) {
    spec_.validate();
    check_user(spec_, user);
    const double n = spec_.n_users;
    switch (spec_.family) {
    case ChirpFamily::Linear:
        break;
    case ChirpFamily::Sinusoidal:
        branch_ = Branch::Sinusoidal;
        coef_ = (2.0 * user - n) / (2.0 * n);
        break;
    case ChirpFamily::Quartic:
        // At 2m == N the correction vanishes and the chirp is linear.
        coef_ = (n - 2.0 * user) / (2.0 * n);
        if (2 * user < spec_.n_users) {
            branch_ = Branch::QuarticLow;
        } else if (2 * user > spec_.n_users) {
            branch_ = Branch::QuarticHigh;
        }
        break;
    }
}

double PhaseFunction::phase_norm(double tau) const {
    const double n = spec_.n_users;
    const double x = tau + user_ / n;
    double phase = pi * n * x * x;
    switch (branch_) {
    case Branch::None:
        break;
    case Branch::Sinusoidal: {
        const double w = 2.0 * pi * kSinusoidalF0;
        phase += pi * n * coef_ * tau / w * std::sin(w * tau);
        break;
    }
    case Branch::QuarticLow: {
        const double t2 = tau * tau;
        phase += 2.0 * pi * coef_ * (t2 * t2 - 4.0 / 3.0 * t2 * tau - 0.5 * t2);
        break;
    }
    case Branch::QuarticHigh: {
        const double t2 = tau * tau;
        phase += 2.0 * pi * coef_ * (-t2 * t2 + 8.0 / 3.0 * t2 * tau - 1.5 * t2 - tau);
        break;
    }
    }
    return phase;
}

double PhaseFunction::frequency_norm(double tau) const {
    const double n = spec_.n_users;
    double f = n * tau + user_;
    switch (branch_) {
    case Branch::None:
        break;
    case Branch::Sinusoidal: {
        const double w = 2.0 * pi * kSinusoidalF0;
        f += coef_ * n / (4.0 * pi * kSinusoidalF0) * std::sin(w * tau) +
             coef_ * tau * n / 2.0 * std::cos(w * tau);
        break;
    }
    case Branch::QuarticLow: {
        const double u = 2.0 * tau - 1.0;
        f += coef_ * tau * (u * u - 2.0);
        break;
    }
    case Branch::QuarticHigh: {
        const double u = 2.0 * tau - 1.0;
        f += coef_ * (1.0 - tau) * (u * u - 2.0);
        break;
    }
    }
    return f;
}

double PhaseFunction::rate_norm(double tau) const {
    const double n = spec_.n_users;
    double r = n;
    switch (branch_) {
    case Branch::None:
        break;
    case Branch::Sinusoidal: {
        const double w = 2.0 * pi * kSinusoidalF0;
        r += coef_ * n * w / (4.0 * pi * kSinusoidalF0) * std::cos(w * tau) +
             coef_ * n / 2.0 * (std::cos(w * tau) - w * tau * std::sin(w * tau));
        break;
    }
    case Branch::QuarticLow:
        r += coef_ * (12.0 * tau * tau - 8.0 * tau - 1.0);
        break;
    case Branch::QuarticHigh:
        r += coef_ * (-12.0 * tau * tau + 16.0 * tau - 3.0);
        break;
    }
    return r;
}

double PhaseFunction::frequency(double t) const {
    const double T = spec_.symbol_duration;
    return frequency_norm(t / T) / T;
}

double PhaseFunction::rate(double t) const {
    const double T = spec_.symbol_duration;
    return rate_norm(t / T) / (T * T);
}

double chirp_phase(const SignalSetSpec& spec, int m, double t) {
    const PhaseFunction fn(spec, m);
    check_time(spec, t);
    return fn.phase(t);
}

double instantaneous_frequency(const SignalSetSpec& spec, int m, double t) {
    const PhaseFunction fn(spec, m);
    check_time(spec, t);
    return fn.frequency(t);
}

double chirp_rate(const SignalSetSpec& spec, int m, double t) {
    const PhaseFunction fn(spec, m);
    check_time(spec, t);
    return fn.rate(t);
}

ChirpWaveform synthesize(const SignalSetSpec& spec, int m) {
    const PhaseFunction fn(spec, m);
    ChirpWaveform w;
    w.user_index = m;
    w.spec = spec;
    const auto count = static_cast<std::size_t>(spec.samples_per_symbol);
    w.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double tau = static_cast<double>(i) / static_cast<double>(count);
        w.samples[i] = std::polar(1.0, fn.phase_norm(tau));
    }
    return w;
}

double wrap_delay(double eps, double symbol_duration) {
    double r = std::fmod(eps, symbol_duration);
    if (r < 0.0) r += symbol_duration;
    if (r >= symbol_duration) r = 0.0;
    return r;
}

void cyclic_shift(const std::vector<std::complex<double>>& in, std::ptrdiff_t shift,
                  std::vector<std::complex<double>>& out) {
    const auto n = static_cast<std::ptrdiff_t>(in.size());
    out.resize(in.size());
    if (n == 0) return;
    shift %= n;
    if (shift < 0) shift += n;
    // out[i] = in[i - shift]
    std::copy(in.end() - shift, in.end(), out.begin());
    std::copy(in.begin(), in.end() - shift, out.begin() + shift);
}

ChirpWaveform delayed(const ChirpWaveform& w, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
        throw std::domain_error("delay must be finite and non-negative");
    }
    const double T = w.spec.symbol_duration;
    const double h = w.spec.sample_interval();
    const double requested = wrap_delay(eps, T);
    const auto shift = static_cast<std::ptrdiff_t>(std::llround(requested / h));

    ChirpWaveform out;
    out.user_index = w.user_index;
    out.spec = w.spec;
    cyclic_shift(w.samples, shift, out.samples);
    const double applied = wrap_delay(w.applied_delay + static_cast<double>(shift) * h, T);
    out.applied_delay = applied;
    out.delay_residual = w.delay_residual + (requested - static_cast<double>(shift) * h);
    return out;
}

}  // namespace qscss
