#pragma once

// Chirp families for multi-user chirp spread spectrum and their delayed,
// cyclically wrapped variants.
//
// All families are defined in normalized time tau = t / T. A user m of an
// N-user set has the linear base phase pi * N * (tau + m / N)^2 and,
// depending on the family, a nonlinear correction. Instantaneous frequencies
// in Hz are the normalized-time frequency divided by T.

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qscss {

enum class ChirpFamily { Linear, Sinusoidal, Quartic };

std::string_view to_string(ChirpFamily family);

// Accepts "linear", "sinusoidal" (or "sin"), "quartic"; case-insensitive.
ChirpFamily parse_family(std::string_view name);

struct SignalSetSpec {
    ChirpFamily family = ChirpFamily::Linear;
    int n_users = 1;
    double symbol_duration = 1.0;  // seconds
    int samples_per_symbol = 64;

    // Throws std::invalid_argument on a malformed set design.
    void validate() const;

    double sample_interval() const { return symbol_duration / samples_per_symbol; }
    // Total bandwidth occupied by the N-user set, 2N/T.
    double bandwidth() const { return 2.0 * n_users / symbol_duration; }
};

// Phase, frequency and chirp rate of one user's chirp as functions of time.
// Evaluation is unchecked for speed; the free functions below validate.
class PhaseFunction {
public:
    PhaseFunction(const SignalSetSpec& spec, int user);

    int user() const { return user_; }
    const SignalSetSpec& spec() const { return spec_; }

    // Normalized time: radians, cycles per unit tau, cycles per unit tau^2.
    double phase_norm(double tau) const;
    double frequency_norm(double tau) const;
    double rate_norm(double tau) const;

    // Physical time: radians, Hz, Hz/s.
    double phase(double t) const { return phase_norm(t / spec_.symbol_duration); }
    double frequency(double t) const;
    double rate(double t) const;

private:
    enum class Branch { None, Sinusoidal, QuarticLow, QuarticHigh };

    SignalSetSpec spec_;
    int user_;
    Branch branch_ = Branch::None;
    double coef_ = 0.0;  // alpha for sinusoidal, beta for quartic
};

// Sinusoidal family constant f0 in cycles per unit normalized time.
inline constexpr double kSinusoidalF0 = 0.31830988618379067;  // 1/pi

double chirp_phase(const SignalSetSpec& spec, int m, double t);
double instantaneous_frequency(const SignalSetSpec& spec, int m, double t);
double chirp_rate(const SignalSetSpec& spec, int m, double t);

struct ChirpWaveform {
    int user_index = 0;
    SignalSetSpec spec;
    std::vector<std::complex<double>> samples;
    // Delay actually applied (a whole number of samples) and the difference
    // between the requested and applied delay.
    double applied_delay = 0.0;
    double delay_residual = 0.0;
};

// samples[i] = exp(j * chirp_phase(spec, m, i * T / samples_per_symbol)).
ChirpWaveform synthesize(const SignalSetSpec& spec, int m);

// Cyclic delay within the symbol: out(t) = w(t - eps) for t >= eps and
// w(t + T - eps) for t < eps. eps is reduced modulo T and snapped to the
// nearest sample.
ChirpWaveform delayed(const ChirpWaveform& w, double eps);

// Cyclic shift of a sample vector by a whole number of samples.
void cyclic_shift(const std::vector<std::complex<double>>& in, std::ptrdiff_t shift,
                  std::vector<std::complex<double>>& out);

// Reduces a delay in seconds to [0, T).
double wrap_delay(double eps, double symbol_duration);

}  // namespace qscss
