#pragma once

// Analytic bit error probability of binary CSS with multiple access
// interference. For a victim k with interferer correlation vector rho
// (energy-scaled real parts) the error probability is the average over all
// interferer symbol hypotheses b in {-1, +1}^(N-1) of
//
//   Q((1 + rho^T b) * sqrt(Es_k / N0)).
//
// The argument keeps its sign: when interference inverts the decision
// statistic the conditional error probability exceeds one half.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qscss/correlation.hpp"
#include "qscss/waveforms.hpp"

namespace qscss {

// Exhaustive enumeration is refused above this many users.
inline constexpr int kExactEnumerationCap = 22;

class EnumerationCapExceeded : public std::runtime_error {
public:
    explicit EnumerationCapExceeded(int n_users);
    int n_users() const { return n_users_; }

private:
    int n_users_;
};

struct Interferer {
    int user = 0;
    double delay = 0.0;   // seconds, relative to the victim
    double energy = 1.0;  // symbol energy
};

struct InterferenceProfile {
    int victim = 0;
    double victim_energy = 1.0;
    double noise_density = 1.0;  // N0
    std::vector<Interferer> others;

    double esn0() const { return victim_energy / noise_density; }
    int n_users() const { return static_cast<int>(others.size()) + 1; }
    void validate(const SignalSetSpec& spec) const;
};

// Victim k synchronized, every other user of the set at the same delay eps,
// all energies equal, noise density set from Es/N0 in dB.
InterferenceProfile uniform_delay_profile(const SignalSetSpec& spec, int victim, double eps, double esn0_db);

struct BVector {
    std::uint64_t index = 0;
    std::vector<int> entries;  // entry i = (-1)^(bit i of index)
};

// All 2^(n_users - 1) hypothesis vectors in index order.
std::vector<BVector> b_vectors(int n_users);

enum class CorrelationEngine { Auto, Quadrature };

std::vector<double> rho_vector(const InterferenceProfile& profile, const SignalSetSpec& spec,
                               CorrelationEngine engine = CorrelationEngine::Auto);

enum class BerMethod { Exact, SampledBVectors, DelayAveraged, Simulated };

std::string_view to_string(BerMethod method);

struct BerPoint {
    double esn0 = 0.0;  // linear
    double probability = 0.0;
    BerMethod method = BerMethod::Exact;
    std::uint64_t samples = 0;  // hypotheses, delay draws or bits
    double ci_halfwidth = 0.0;  // 95 % interval half-width where sampled

    double esn0_db() const;
};

double db_to_linear(double db);
double linear_to_db(double ratio);

// Exact average over all hypotheses for a given correlation vector.
double ber_from_rho(std::span<const double> rho, double esn0);

BerPoint ber_exact(const InterferenceProfile& profile, const SignalSetSpec& spec,
                   CorrelationEngine engine = CorrelationEngine::Auto);

// Unbiased Monte Carlo estimate over uniformly drawn hypotheses. With
// n_samples >= 2^(N-1) the hypotheses are enumerated instead.
BerPoint ber_sampled(const InterferenceProfile& profile, const SignalSetSpec& spec, std::uint64_t n_samples,
                     std::uint64_t seed, CorrelationEngine engine = CorrelationEngine::Auto);

double ber_sampled_from_rho(std::span<const double> rho, double esn0, std::uint64_t n_samples,
                            std::uint64_t seed, double* standard_error = nullptr);

// How Gaussian delays are drawn for the delay-averaged error probability.
enum class DelayReference {
    VictimAligned,  // victim at 0, interferer delays ~ N(0, sigma)
    AllUsersDrawn,  // every user drawn ~ N(0, sigma); interferers enter relative to the victim
};

struct DelayAverageOptions {
    DelayReference reference = DelayReference::VictimAligned;
    CorrelationEngine engine = CorrelationEngine::Auto;
    // Above this many interferers each draw uses ber_sampled with this many
    // hypotheses instead of full enumeration.
    int exact_interferer_limit = 12;
    std::uint64_t hypotheses_per_draw = 4096;
};

// Averages the error probability over Gaussian delays (reduced modulo T).
// The delays in profile_template.others are ignored.
BerPoint ber_gaussian_delay_avg(const InterferenceProfile& profile_template, const SignalSetSpec& spec,
                                double sigma, std::uint64_t n_draws, std::uint64_t seed,
                                const DelayAverageOptions& options = {});

}  // namespace qscss
