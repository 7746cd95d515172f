#include "qscss/ber.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qscss/specfun.hpp"

namespace qscss {

namespace {

constexpr double kZ95 = 1.959963984540054;

void check_esn0(double esn0) {
    if (!(esn0 >= 0.0) || !std::isfinite(esn0)) throw std::invalid_argument("Es/N0 must be finite and >= 0");
}

double hypothesis_term(std::span<const double> rho, std::uint64_t bits, double root_snr) {
    double s = 1.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        s += ((bits >> i) & 1u) ? -rho[i] : rho[i];
    }
    return q_function(s * root_snr);
}

}  // namespace

EnumerationCapExceeded::EnumerationCapExceeded(int n_users)
    : std::runtime_error("exact BER enumeration over 2^" + std::to_string(n_users - 1) +
                         " hypotheses exceeds the cap of " + std::to_string(kExactEnumerationCap) +
                         " users; use ber_sampled instead"),
      n_users_(n_users) {}

void InterferenceProfile::validate(const SignalSetSpec& spec) const {
    spec.validate();
    if (victim < 0 || victim >= spec.n_users) throw std::domain_error("victim index out of range");
    if (!(victim_energy > 0.0)) throw std::invalid_argument("victim energy must be positive");
    if (!(noise_density > 0.0)) throw std::invalid_argument("noise density must be positive");
    for (const auto& o : others) {
        if (o.user < 0 || o.user >= spec.n_users) throw std::domain_error("interferer index out of range");
        if (o.user == victim) throw std::invalid_argument("victim listed as its own interferer");
        if (!(o.energy > 0.0)) throw std::invalid_argument("interferer energy must be positive");
        if (!std::isfinite(o.delay)) throw std::domain_error("interferer delay must be finite");
    }
}

InterferenceProfile uniform_delay_profile(const SignalSetSpec& spec, int victim, double eps, double esn0_db) {
    InterferenceProfile p;
    p.victim = victim;
    p.victim_energy = 1.0;
    p.noise_density = 1.0 / db_to_linear(esn0_db);
    for (int u = 0; u < spec.n_users; ++u) {
        if (u != victim) p.others.push_back({u, eps, 1.0});
    }
    p.validate(spec);
    return p;
}

std::vector<BVector> b_vectors(int n_users) {
    if (n_users < 1) throw std::invalid_argument("b_vectors needs at least one user");
    if (n_users > kExactEnumerationCap) throw EnumerationCapExceeded(n_users);
    const int len = n_users - 1;
    const std::uint64_t count = std::uint64_t{1} << len;
    std::vector<BVector> out;
    out.reserve(count);
    for (std::uint64_t xi = 0; xi < count; ++xi) {
        BVector b;
        b.index = xi;
        b.entries.resize(static_cast<std::size_t>(len));
        for (int i = 0; i < len; ++i) b.entries[i] = ((xi >> i) & 1u) ? -1 : 1;
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<double> rho_vector(const InterferenceProfile& profile, const SignalSetSpec& spec,
                               CorrelationEngine engine) {
    profile.validate(spec);
    std::vector<double> rho;
    rho.reserve(profile.others.size());
    for (const auto& o : profile.others) {
        const double eps = wrap_delay(o.delay, spec.symbol_duration);
        const CorrelationResult c = engine == CorrelationEngine::Quadrature
                                        ? xcorr_quadrature(spec, profile.victim, o.user, eps)
                                        : xcorr_auto(spec, profile.victim, o.user, eps);
        rho.push_back(std::sqrt(o.energy / profile.victim_energy) * c.value.real());
    }
    return rho;
}

std::string_view to_string(BerMethod method) {
    switch (method) {
    case BerMethod::Exact: return "exact";
    case BerMethod::SampledBVectors: return "sampled";
    case BerMethod::DelayAveraged: return "delay_averaged";
    case BerMethod::Simulated: return "simulated";
    }
    return "unknown";
}

double BerPoint::esn0_db() const { return linear_to_db(esn0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double ber_from_rho(std::span<const double> rho, double esn0) {
    check_esn0(esn0);
    const int n_users = static_cast<int>(rho.size()) + 1;
    if (n_users > kExactEnumerationCap) throw EnumerationCapExceeded(n_users);
    const double root_snr = std::sqrt(esn0);
    const std::uint64_t count = std::uint64_t{1} << rho.size();
    double sum = 0.0;
    for (std::uint64_t xi = 0; xi < count; ++xi) sum += hypothesis_term(rho, xi, root_snr);
    return sum / static_cast<double>(count);
}

BerPoint ber_exact(const InterferenceProfile& profile, const SignalSetSpec& spec, CorrelationEngine engine) {
    if (profile.n_users() > kExactEnumerationCap) throw EnumerationCapExceeded(profile.n_users());
    const std::vector<double> rho = rho_vector(profile, spec, engine);
    BerPoint p;
    p.esn0 = profile.esn0();
    p.probability = ber_from_rho(rho, p.esn0);
    p.method = BerMethod::Exact;
    p.samples = std::uint64_t{1} << rho.size();
    return p;
}

double ber_sampled_from_rho(std::span<const double> rho, double esn0, std::uint64_t n_samples,
                            std::uint64_t seed, double* standard_error) {
    check_esn0(esn0);
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (rho.size() < 63 && n_samples >= (std::uint64_t{1} << rho.size())) {
        if (standard_error) *standard_error = 0.0;
        return ber_from_rho(rho, esn0);
    }
    const double root_snr = std::sqrt(esn0);
    std::mt19937_64 rng(seed);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t n = 1; n <= n_samples; ++n) {
        double s = 1.0;
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            if (i % 64 == 0) bits = rng();
            s += (bits & 1u) ? -rho[i] : rho[i];
            bits >>= 1;
        }
        const double v = q_function(s * root_snr);
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    if (standard_error) {
        *standard_error =
            n_samples > 1 ? std::sqrt(m2 / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples)) : 0.0;
    }
    return mean;
}

BerPoint ber_sampled(const InterferenceProfile& profile, const SignalSetSpec& spec, std::uint64_t n_samples,
                     std::uint64_t seed, CorrelationEngine engine) {
    const std::vector<double> rho = rho_vector(profile, spec, engine);
    double se = 0.0;
    BerPoint p;
    p.esn0 = profile.esn0();
    p.probability = ber_sampled_from_rho(rho, p.esn0, n_samples, seed, &se);
    p.method = BerMethod::SampledBVectors;
    p.samples = n_samples;
    p.ci_halfwidth = kZ95 * se;
    return p;
}

BerPoint ber_gaussian_delay_avg(const InterferenceProfile& profile_template, const SignalSetSpec& spec,
                                double sigma, std::uint64_t n_draws, std::uint64_t seed,
                                const DelayAverageOptions& options) {
    profile_template.validate(spec);
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and >= 0");
    if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma > 0.0 ? sigma : 1.0);
    auto draw = [&]() { return sigma > 0.0 ? gauss(rng) : 0.0; };

    InterferenceProfile profile = profile_template;
    const bool exact = static_cast<int>(profile.others.size()) <= options.exact_interferer_limit;
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t n = 1; n <= n_draws; ++n) {
        const double victim_delay = options.reference == DelayReference::AllUsersDrawn ? draw() : 0.0;
        for (auto& o : profile.others) o.delay = wrap_delay(draw() - victim_delay, spec.symbol_duration);
        const std::vector<double> rho = rho_vector(profile, spec, options.engine);
        const double v = exact ? ber_from_rho(rho, profile.esn0())
                               : ber_sampled_from_rho(rho, profile.esn0(), options.hypotheses_per_draw, rng());
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }

    BerPoint p;
    p.esn0 = profile.esn0();
    p.probability = mean;
    p.method = BerMethod::DelayAveraged;
    p.samples = n_draws;
    p.ci_halfwidth =
        n_draws > 1 ? kZ95 * std::sqrt(m2 / static_cast<double>(n_draws - 1) / static_cast<double>(n_draws)) : 0.0;
    return p;
}

}  // namespace qscss
