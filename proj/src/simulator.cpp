#include "qscss/simulator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qscss/ber.hpp"
#include "qscss/detail/parallel.hpp"

namespace qscss {

namespace {

using cd = std::complex<double>;
using std::numbers::pi;

constexpr std::size_t kPacketsPerBatch = 32;
constexpr double kZ95 = 1.959963984540054;

std::size_t snap_delay(double delay, const SignalSetSpec& spec) {
    const auto s = static_cast<std::size_t>(spec.samples_per_symbol);
    const double wrapped = wrap_delay(delay, spec.symbol_duration);
    return static_cast<std::size_t>(std::llround(wrapped / spec.sample_interval())) % s;
}

double noise_density_for(double esn0_db) {
    if (std::isinf(esn0_db) && esn0_db > 0.0) return 0.0;
    return 1.0 / db_to_linear(esn0_db);
}

// Re of h * sum_n x[n - d] conj(y[n]) for every cyclic shift d, via one
// forward transform of X * conj(Y).
class CorrelationTableBuilder {
public:
    explicit CorrelationTableBuilder(std::size_t size) : size_(size) {
        buf_ = fftw_alloc_complex(size);
        out_ = fftw_alloc_complex(size);
        plan_ = fftw_plan_dft_1d(static_cast<int>(size), buf_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    ~CorrelationTableBuilder() {
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
        fftw_free(out_);
    }
    CorrelationTableBuilder(const CorrelationTableBuilder&) = delete;
    CorrelationTableBuilder& operator=(const CorrelationTableBuilder&) = delete;

    std::vector<cd> spectrum(const std::vector<cd>& x) {
        for (std::size_t i = 0; i < size_; ++i) {
            buf_[i][0] = x[i].real();
            buf_[i][1] = x[i].imag();
        }
        fftw_execute(plan_);
        std::vector<cd> out(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = {out_[i][0], out_[i][1]};
        return out;
    }

    std::vector<double> table(const std::vector<cd>& x_spec, const std::vector<cd>& y_spec, double h) {
        for (std::size_t i = 0; i < size_; ++i) {
            const cd v = x_spec[i] * std::conj(y_spec[i]);
            buf_[i][0] = v.real();
            buf_[i][1] = v.imag();
        }
        fftw_execute(plan_);
        std::vector<double> out(size_);
        const double scale = h / static_cast<double>(size_);
        for (std::size_t d = 0; d < size_; ++d) out[d] = out_[d][0] * scale;
        return out;
    }

private:
    std::size_t size_;
    fftw_complex* buf_;
    fftw_complex* out_;
    fftw_plan plan_;
};

struct PacketOutcome {
    std::vector<std::uint64_t> errors;  // per active user
};

class LinkSimulator {
public:
    explicit LinkSimulator(const LinkConfig& config) : cfg_(config), spec_(config.spec) {
        active_ = cfg_.active_users();
        k_ = active_.size();
        s_ = static_cast<std::size_t>(spec_.samples_per_symbol);
        h_ = spec_.sample_interval();
        amplitude_.resize(k_);
        for (std::size_t c = 0; c < k_; ++c) amplitude_[c] = std::sqrt(cfg_.energy(active_[c]) / spec_.symbol_duration);
        for (int b = 0; b < 2; ++b) {
            templates_[b].resize(k_);
            for (std::size_t c = 0; c < k_; ++c) {
                templates_[b][c] = (b == 1 && cfg_.subband == SubbandModel::SharedBaseband)
                                       ? modulate(spec_, active_[c], 1).samples
                                       : synthesize(spec_, active_[c]).samples;
            }
        }
        if (cfg_.noise == NoiseInjection::CorrelatorProjected) build_tables();
    }

    const std::vector<int>& active() const { return active_; }

    SimPoint run_point(std::size_t point_index) const {
        const double esn0_db = cfg_.esn0_db[point_index];
        const double n0 = noise_density_for(esn0_db);
        const std::uint64_t bits_per_packet = static_cast<std::uint64_t>(cfg_.block_length) * k_;

        SimPoint pt;
        pt.esn0_db = esn0_db;
        pt.user_errors.assign(k_, 0);
        pt.user_bits.assign(k_, 0);
        double rate_sum = 0.0;
        double rate_sq = 0.0;
        std::uint64_t next_packet = 0;
        std::vector<PacketOutcome> batch;
        while (true) {
            const std::uint64_t remaining = cfg_.max_bits > pt.bits ? cfg_.max_bits - pt.bits : 0;
            if (remaining == 0) break;
            const std::uint64_t wanted = (remaining + bits_per_packet - 1) / bits_per_packet;
            const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(wanted, kPacketsPerBatch));
            batch.assign(n, {});
            detail::parallel_for(
                n, [&](std::size_t i) { batch[i] = run_packet(next_packet + i, point_index, n0); }, cfg_.threads);
            next_packet += n;
            for (const auto& o : batch) {
                std::uint64_t e = 0;
                for (std::size_t c = 0; c < k_; ++c) {
                    pt.user_errors[c] += o.errors[c];
                    pt.user_bits[c] += static_cast<std::uint64_t>(cfg_.block_length);
                    e += o.errors[c];
                }
                pt.errors += e;
                pt.bits += bits_per_packet;
                const double r = static_cast<double>(e) / static_cast<double>(bits_per_packet);
                rate_sum += r;
                rate_sq += r * r;
            }
            pt.packets = next_packet;
            if (cfg_.target_errors > 0 && pt.errors >= cfg_.target_errors && pt.bits >= cfg_.min_bits) {
                pt.reached_target = true;
                break;
            }
        }

        pt.ber = pt.bits > 0 ? static_cast<double>(pt.errors) / static_cast<double>(pt.bits) : 0.0;
        if (pt.bits > 0) pt.binomial_se = std::sqrt(pt.ber * (1.0 - pt.ber) / static_cast<double>(pt.bits));
        if (pt.packets > 1) {
            const double p = static_cast<double>(pt.packets);
            const double mean = rate_sum / p;
            const double var = std::max(0.0, (rate_sq - p * mean * mean) / (p - 1.0));
            pt.packet_se = std::sqrt(var / p);
        }
        pt.ci_halfwidth = kZ95 * std::max(pt.binomial_se, pt.packet_se);
        return pt;
    }

private:
    // tables_[((a * k + c) * 2 + nu) * 2 + b][d]: Re of the branch-b correlator
    // output of victim a for interferer c sending nu, unit amplitude, shift d.
    void build_tables() {
        CorrelationTableBuilder builder(s_);
        std::array<std::vector<std::vector<cd>>, 2> spec;
        for (int b = 0; b < 2; ++b) {
            spec[b].resize(k_);
            for (std::size_t c = 0; c < k_; ++c) spec[b][c] = builder.spectrum(templates_[b][c]);
        }
        tables_.assign(k_ * k_ * 4, {});
        for (std::size_t a = 0; a < k_; ++a) {
            for (std::size_t c = 0; c < k_; ++c) {
                for (int nu = 0; nu < 2; ++nu) {
                    for (int b = 0; b < 2; ++b) {
                        auto& t = tables_[table_index(a, c, nu, b)];
                        if (cfg_.subband == SubbandModel::Channelized) {
                            if (nu != b) continue;
                            if (nu == 1) {
                                t = tables_[table_index(a, c, 0, 0)];
                                continue;
                            }
                        }
                        t = builder.table(spec[nu][c], spec[b][a], h_);
                    }
                }
            }
        }
    }

    std::size_t table_index(std::size_t a, std::size_t c, int nu, int b) const {
        return ((a * k_ + c) * 2 + static_cast<std::size_t>(nu)) * 2 + static_cast<std::size_t>(b);
    }

    std::vector<std::size_t> draw_delays(std::mt19937_64& rng) const {
        std::vector<std::size_t> d(k_, 0);
        if (cfg_.delays.kind == DelayKind::Fixed) {
            for (std::size_t c = 0; c < k_ && c < cfg_.delays.fixed.size(); ++c) d[c] = snap_delay(cfg_.delays.fixed[c], spec_);
        } else if (cfg_.delays.sigma > 0.0) {
            std::normal_distribution<double> g(0.0, cfg_.delays.sigma);
            for (std::size_t c = 0; c < k_; ++c) d[c] = snap_delay(g(rng), spec_);
        }
        return d;
    }

    PacketOutcome run_packet(std::uint64_t packet, std::size_t point_index, double n0) const {
        const auto lo = static_cast<std::uint32_t>(cfg_.seed);
        const auto hi = static_cast<std::uint32_t>(cfg_.seed >> 32);
        const auto plo = static_cast<std::uint32_t>(packet);
        const auto phi = static_cast<std::uint32_t>(packet >> 32);
        std::seed_seq data_seq{lo, hi, plo, phi, 0u};
        std::seed_seq noise_seq{lo, hi, plo, phi, static_cast<std::uint32_t>(point_index + 1)};
        std::mt19937_64 data_rng(data_seq);
        std::mt19937_64 noise_rng(noise_seq);

        const std::vector<std::size_t> delay = draw_delays(data_rng);
        const auto j = static_cast<std::size_t>(cfg_.block_length);
        std::vector<std::uint8_t> bits(j * k_);
        for (std::size_t i = 0; i < bits.size(); i += 64) {
            std::uint64_t word = data_rng();
            for (std::size_t b = i; b < std::min(bits.size(), i + 64); ++b, word >>= 1) bits[b] = word & 1u;
        }

        PacketOutcome out;
        out.errors.assign(k_, 0);
        if (cfg_.noise == NoiseInjection::CorrelatorProjected) {
            run_projected(delay, bits, n0, noise_rng, out);
        } else {
            run_per_sample(delay, bits, n0, noise_rng, out);
        }
        return out;
    }

    void run_projected(const std::vector<std::size_t>& delay, const std::vector<std::uint8_t>& bits, double n0,
                       std::mt19937_64& rng, PacketOutcome& out) const {
        std::normal_distribution<double> unit(0.0, 1.0);
        const double sd = std::sqrt(n0 * spec_.symbol_duration / 2.0);
        const auto j = static_cast<std::size_t>(cfg_.block_length);
        for (std::size_t sym = 0; sym < j; ++sym) {
            const std::uint8_t* nu = &bits[sym * k_];
            for (std::size_t a = 0; a < k_; ++a) {
                double r[2] = {0.0, 0.0};
                for (std::size_t c = 0; c < k_; ++c) {
                    const std::size_t d = (delay[c] + s_ - delay[a]) % s_;
                    for (int b = 0; b < 2; ++b) {
                        const auto& t = tables_[table_index(a, c, nu[c], b)];
                        if (!t.empty()) r[b] += amplitude_[c] * t[d];
                    }
                }
                r[0] += sd * unit(rng);
                r[1] += sd * unit(rng);
                const std::uint8_t decided = r[1] > r[0] ? 1 : 0;
                if (decided != nu[a]) ++out.errors[a];
            }
        }
    }

    void run_per_sample(const std::vector<std::size_t>& delay, const std::vector<std::uint8_t>& bits, double n0,
                        std::mt19937_64& rng, PacketOutcome& out) const {
        const auto j = static_cast<std::size_t>(cfg_.block_length);
        const bool channelized = cfg_.subband == SubbandModel::Channelized;
        std::vector<cd> stream[2];
        std::vector<cd> shifted;
        for (std::size_t sym = 0; sym < j; ++sym) {
            const std::uint8_t* nu = &bits[sym * k_];
            for (std::size_t a = 0; a < k_; ++a) {
                stream[0].assign(s_, cd{});
                stream[1].assign(s_, cd{});
                for (std::size_t c = 0; c < k_; ++c) {
                    const auto d = static_cast<std::ptrdiff_t>((delay[c] + s_ - delay[a]) % s_);
                    cyclic_shift(templates_[nu[c]][c], d, shifted);
                    auto& dst = stream[channelized ? nu[c] : 0];
                    for (std::size_t i = 0; i < s_; ++i) dst[i] += amplitude_[c] * shifted[i];
                }
                awgn_add(stream[0], n0, h_, rng);
                if (channelized) awgn_add(stream[1], n0, h_, rng);
                double r[2];
                for (int b = 0; b < 2; ++b) {
                    const auto& y = stream[channelized ? b : 0];
                    const auto& x = templates_[b][a];
                    double acc = 0.0;
                    for (std::size_t i = 0; i < s_; ++i) acc += (y[i] * std::conj(x[i])).real();
                    r[b] = acc * h_;
                }
                const std::uint8_t decided = r[1] > r[0] ? 1 : 0;
                if (decided != nu[a]) ++out.errors[a];
            }
        }
    }

    const LinkConfig& cfg_;
    const SignalSetSpec& spec_;
    std::vector<int> active_;
    std::size_t k_ = 0;
    std::size_t s_ = 0;
    double h_ = 0.0;
    std::vector<double> amplitude_;
    std::array<std::vector<std::vector<cd>>, 2> templates_;
    std::vector<std::vector<double>> tables_;
};

}  // namespace

ChirpWaveform modulate(const SignalSetSpec& spec, int m, int bit) {
    if (bit != 0 && bit != 1) throw std::domain_error("bit must be 0 or 1");
    ChirpWaveform w = synthesize(spec, m);
    if (bit == 0) return w;
    const double sign = spec.n_users % 2 == 0 ? 1.0 : -1.0;
    const auto count = static_cast<double>(w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const double tau = static_cast<double>(i) / count;
        w.samples[i] *= sign * std::polar(1.0, 2.0 * pi * spec.n_users * tau);
    }
    return w;
}

std::vector<int> select_partial_load(int n_users, int k_active) {
    if (n_users < 1) throw std::domain_error("n_users must be >= 1");
    if (k_active < 1 || k_active > n_users) throw std::domain_error("K must satisfy 1 <= K <= N");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k_active));
    for (int i = 0; i < k_active; ++i) {
        const auto idx = static_cast<int>(std::lround(static_cast<double>(i) * n_users / k_active));
        out.push_back(std::clamp(idx, 0, n_users - 1));
    }
    return out;
}

void awgn_add(std::vector<cd>& samples, double noise_density, double sample_interval, std::mt19937_64& rng) {
    if (!(noise_density >= 0.0)) throw std::invalid_argument("noise density must be >= 0");
    if (!(sample_interval > 0.0)) throw std::invalid_argument("sample interval must be positive");
    if (noise_density == 0.0) return;
    const double sd = std::sqrt(noise_density / sample_interval / 2.0);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (auto& s : samples) {
        const double re = unit(rng);
        const double im = unit(rng);
        s += cd(sd * re, sd * im);
    }
}

void LinkConfig::validate() const {
    spec.validate();
    if (n_active < 0 || n_active > spec.n_users) throw std::domain_error("K must satisfy 1 <= K <= N");
    if (delays.kind == DelayKind::Gaussian && !(delays.sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    for (double d : delays.fixed) {
        if (!std::isfinite(d)) throw std::invalid_argument("fixed delays must be finite");
    }
    if (!energies.empty() && energies.size() != static_cast<std::size_t>(spec.n_users)) {
        throw std::invalid_argument("energies must list one value per user");
    }
    for (double e : energies) {
        if (!(e > 0.0)) throw std::invalid_argument("energies must be positive");
    }
    if (esn0_db.empty()) throw std::invalid_argument("Es/N0 grid is empty");
    for (double v : esn0_db) {
        if (std::isnan(v) || (std::isinf(v) && v < 0.0)) throw std::invalid_argument("invalid Es/N0 value");
    }
    if (block_length < 1) throw std::invalid_argument("block length must be >= 1");
    if (max_bits < 10'000 && target_errors < 100) {
        throw std::invalid_argument("need at least 1e4 bits per point or a target of at least 100 errors");
    }
    if (min_bits > max_bits) throw std::invalid_argument("min_bits exceeds max_bits");
}

std::vector<int> LinkConfig::active_users() const {
    return select_partial_load(spec.n_users, n_active == 0 ? spec.n_users : n_active);
}

double LinkConfig::energy(int user) const {
    return energies.empty() ? 1.0 : energies.at(static_cast<std::size_t>(user));
}

SimResult run_link_sim(const LinkConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    SimResult result;
    result.config = config;
    const LinkSimulator sim(result.config);
    result.active = sim.active();
    for (std::size_t q = 0; q < config.esn0_db.size(); ++q) result.points.push_back(sim.run_point(q));
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

double analytic_fixed_delay_ber(const LinkConfig& config, double esn0_db) {
    config.validate();
    if (config.delays.kind != DelayKind::Fixed) throw std::invalid_argument("analytic reference needs fixed delays");
    const std::vector<int> active = config.active_users();
    const SignalSetSpec& spec = config.spec;
    const double h = spec.sample_interval();
    std::vector<double> delay(active.size(), 0.0);
    for (std::size_t c = 0; c < active.size() && c < config.delays.fixed.size(); ++c) {
        delay[c] = static_cast<double>(snap_delay(config.delays.fixed[c], spec)) * h;
    }
    const double n0 = noise_density_for(esn0_db);
    if (!(n0 > 0.0)) throw std::invalid_argument("analytic reference needs finite Es/N0");
    double sum = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
        InterferenceProfile p;
        p.victim = active[a];
        p.victim_energy = config.energy(active[a]);
        p.noise_density = n0;
        for (std::size_t c = 0; c < active.size(); ++c) {
            if (c == a) continue;
            p.others.push_back({active[c], wrap_delay(delay[c] - delay[a], spec.symbol_duration), config.energy(active[c])});
        }
        sum += ber_exact(p, spec).probability;
    }
    return sum / static_cast<double>(active.size());
}

}  // namespace qscss
