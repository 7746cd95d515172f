#pragma once

// Monte Carlo baseband link simulation of binary CSS with N users.
//
// Every active user sends one bit per symbol on its own chirp. Bit 0 uses
// the chirp in the lower sub-band, bit 1 the same chirp one sub-band
// (N/T Hz) higher. Interferers arrive with per-packet delays applied as a
// cyclic shift within the symbol, and each active user's receiver, aligned
// to its own delay, correlates against both of its templates and picks the
// branch with the larger real part.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qscss/waveforms.hpp"

namespace qscss {

// Bit 0: user m's chirp. Bit 1: the chirp shifted up by N/T Hz, i.e. the
// phase evaluated with t + T in place of t inside the linear base term.
ChirpWaveform modulate(const SignalSetSpec& spec, int m, int bit);

// K user indices maximally spaced over the set: round(i * N / K).
std::vector<int> select_partial_load(int n_users, int k_active);

// Adds circularly symmetric complex Gaussian noise of variance
// noise_density / sample_interval per sample. A correlator
// h * sum(r * conj(template)) over a unit-envelope template of duration T
// then carries complex noise of variance noise_density * T.
void awgn_add(std::vector<std::complex<double>>& samples, double noise_density, double sample_interval,
              std::mt19937_64& rng);

enum class DelayKind { Fixed, Gaussian };

struct DelayModel {
    DelayKind kind = DelayKind::Fixed;
    // Fixed: one delay in seconds per active user, in active order. Missing
    // entries are zero.
    std::vector<double> fixed;
    double sigma = 0.0;  // Gaussian: standard deviation in seconds

    static DelayModel synchronous() { return {}; }
    static DelayModel fixed_delays(std::vector<double> delays) { return {DelayKind::Fixed, std::move(delays), 0.0}; }
    static DelayModel gaussian(double sigma) { return {DelayKind::Gaussian, {}, sigma}; }
};

// How the two sub-bands reach the receiver.
enum class SubbandModel {
    // Each sub-band is received as its own baseband stream, so a chirp sent
    // in one sub-band never reaches the other branch.
    Channelized,
    // Both sub-bands share one baseband stream; bit 1 waveforms come from
    // modulate() and leak into the other branch when delayed.
    SharedBaseband,
};

enum class NoiseInjection {
    // Noise drawn directly at the correlator outputs with the statistics
    // that per-sample white noise would produce there.
    CorrelatorProjected,
    // Full sample-level receive chain: superposed waveforms plus awgn_add.
    PerSample,
};

struct LinkConfig {
    SignalSetSpec spec;
    int n_active = 0;  // K; 0 means all N users
    DelayModel delays;
    std::vector<double> energies;  // per user index; empty means all 1
    std::vector<double> esn0_db;   // reference Es/N0 for unit symbol energy
    std::uint64_t max_bits = 1'000'000;
    std::uint64_t min_bits = 0;
    std::uint64_t target_errors = 200;  // 0 disables early stopping
    int block_length = 64;              // symbols per packet
    std::uint64_t seed = 1;
    SubbandModel subband = SubbandModel::Channelized;
    NoiseInjection noise = NoiseInjection::CorrelatorProjected;
    unsigned threads = 0;

    void validate() const;
    std::vector<int> active_users() const;
    double energy(int user) const;
};

struct SimPoint {
    double esn0_db = 0.0;
    double ber = 0.0;
    std::uint64_t errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t packets = 0;
    std::vector<std::uint64_t> user_errors;  // per active user
    std::vector<std::uint64_t> user_bits;
    double binomial_se = 0.0;
    double packet_se = 0.0;     // from the spread of per-packet error rates
    double ci_halfwidth = 0.0;  // 95 %, from the larger of the two errors
    bool reached_target = false;
};

struct SimResult {
    LinkConfig config;
    std::vector<int> active;
    std::vector<SimPoint> points;
    double wall_time_s = 0.0;
};

SimResult run_link_sim(const LinkConfig& config);

// Analytic error probability averaged over the active users as victims, for
// a Fixed delay model, with delays snapped to the sample grid as in the
// simulation.
double analytic_fixed_delay_ber(const LinkConfig& config, double esn0_db);

}  // namespace qscss
