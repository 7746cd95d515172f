#include "qscss/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qscss/ber.hpp"
#include "qscss/correlation.hpp"
#include "qscss/simulator.hpp"

namespace qscss {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

class CsvFile {
public:
    CsvFile(const ExperimentConfig& config, fs::path path, std::vector<std::string> header)
        : config_(config), path_(std::move(path)), header_(std::move(header)) {}

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
        rows_.push_back(cells);
    }

    fs::path write(double wall_time_s) const {
        std::ostringstream body;
        std::istringstream cfg(config_.to_json().dump(2));
        for (std::string line; std::getline(cfg, line);) body << "# " << line << '\n';
        write_line(body, header_);
        for (const auto& r : rows_) write_line(body, r);
        write_text(path_, body.str());

        json manifest;
        manifest["tool"] = "qscss";
        manifest["version"] = kToolVersion;
        manifest["command"] = config_.command;
        manifest["csv"] = path_.filename().string();
        manifest["columns"] = header_;
        manifest["rows"] = rows_.size();
        manifest["seed"] = config_.seed;
        manifest["wall_time_s"] = wall_time_s;
        manifest["config"] = config_.to_json();
        fs::path mpath = path_;
        mpath.replace_extension(".manifest.json");
        write_text(mpath, manifest.dump(2) + "\n");
        return path_;
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    }

    static void write_text(const fs::path& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
        f << text;
        f.close();
        if (!f) throw std::runtime_error("failed writing " + path.string());
    }

    const ExperimentConfig& config_;
    fs::path path_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string num(double v) { return format_number(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

fs::path prepare_out_dir(const ExperimentConfig& c) {
    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
    return dir;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> default_eps_grid() {
    std::vector<double> g;
    for (int i = 0; i < 100; ++i) g.push_back(i / 100.0);
    return g;
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

DelayReference parse_reference(const std::string& s) {
    if (s == "victim") return DelayReference::VictimAligned;
    if (s == "all") return DelayReference::AllUsersDrawn;
    throw std::invalid_argument("delay_reference must be 'victim' or 'all'");
}

std::vector<int> victims_for(const ExperimentConfig& c, const std::vector<int>& pool) {
    if (c.victim < 0) return pool;
    if (std::find(pool.begin(), pool.end(), c.victim) == pool.end()) {
        throw std::invalid_argument("victim " + std::to_string(c.victim) + " is not an active user");
    }
    return {c.victim};
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, r.ptr);
}

SignalSetSpec ExperimentConfig::spec(ChirpFamily family) const {
    SignalSetSpec s;
    s.family = family;
    s.n_users = n_users;
    s.symbol_duration = symbol_duration;
    s.samples_per_symbol = samples_per_symbol > 0 ? samples_per_symbol : std::max(64, 16 * n_users);
    return s;
}

void ExperimentConfig::validate() const {
    if (command != "waveforms" && command != "xcorr" && command != "ber" && command != "sim") {
        throw std::invalid_argument("unknown command '" + command + "'");
    }
    if (families.empty()) throw std::invalid_argument("no chirp family selected");
    spec(families.front()).validate();
    for (double e : eps_grid) {
        if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("eps_grid entries must lie in [0, 1)");
    }
    if (eps && !(*eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
    if (sigma && !(*sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    if (load_k < 0 || load_k > n_users) throw std::invalid_argument("load_k must satisfy 0 <= K <= N");
    if (victim >= n_users) throw std::invalid_argument("victim out of range");
    if (!energies.empty() && energies.size() != static_cast<std::size_t>(n_users)) {
        throw std::invalid_argument("energies must list one value per user");
    }
    if (segments < 1) throw std::invalid_argument("segments must be >= 1");
    if (bins < 2) throw std::invalid_argument("bins must be >= 2");
    if (ber_mode != "exact" && ber_mode != "sampled" && ber_mode != "delay_avg") {
        throw std::invalid_argument("ber_mode must be exact, sampled or delay_avg");
    }
    parse_reference(delay_reference);
    if (subband != "channelized" && subband != "shared") throw std::invalid_argument("subband must be channelized or shared");
    if (noise != "projected" && noise != "per_sample") throw std::invalid_argument("noise must be projected or per_sample");
    if (esn0_db.empty() && (command == "ber" || command == "sim")) throw std::invalid_argument("esn0_db grid is empty");
}

json ExperimentConfig::to_json() const {
    json j;
    j["command"] = command;
    std::vector<std::string> fam;
    for (auto f : families) fam.emplace_back(to_string(f));
    j["families"] = fam;
    j["n_users"] = n_users;
    j["symbol_duration"] = symbol_duration;
    j["samples_per_symbol"] = samples_per_symbol;
    j["eps_grid"] = eps_grid;
    j["eps"] = eps ? json(*eps) : json(nullptr);
    j["sigma"] = sigma ? json(*sigma) : json(nullptr);
    j["esn0_db"] = esn0_db;
    j["load_k"] = load_k;
    j["victim"] = victim;
    j["segments"] = segments;
    j["bins"] = bins;
    j["ber_mode"] = ber_mode;
    j["delay_reference"] = delay_reference;
    j["samples"] = samples;
    j["draws"] = draws;
    j["convergence"] = convergence;
    j["conv_m"] = conv_m;
    j["conv_k"] = conv_k;
    j["conv_eps"] = conv_eps;
    j["conv_segments"] = conv_segments;
    j["energies"] = energies;
    j["bits"] = bits;
    j["min_bits"] = min_bits;
    j["target_errors"] = target_errors;
    j["block_length"] = block_length;
    j["subband"] = subband;
    j["noise"] = noise;
    j["seed"] = seed;
    j["threads"] = threads;
    j["out"] = out;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const std::vector<std::string> known = {
        "command", "families", "family", "n_users", "symbol_duration", "samples_per_symbol", "eps_grid", "eps",
        "sigma", "esn0_db", "load_k", "victim", "segments", "bins", "ber_mode", "delay_reference", "samples",
        "draws", "convergence", "conv_m", "conv_k", "conv_eps", "conv_segments", "energies", "bits", "min_bits",
        "target_errors", "block_length", "subband", "noise", "seed", "threads", "out"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    ExperimentConfig c;
    read_key(j, "command", c.command);
    if (j.contains("families") || j.contains("family")) {
        c.families.clear();
        const json& f = j.contains("families") ? j.at("families") : j.at("family");
        if (f.is_string()) {
            if (f.get<std::string>() == "all") {
                c.families = {ChirpFamily::Linear, ChirpFamily::Sinusoidal, ChirpFamily::Quartic};
            } else {
                c.families.push_back(parse_family(f.get<std::string>()));
            }
        } else {
            for (const auto& name : f) c.families.push_back(parse_family(name.get<std::string>()));
        }
    }
    read_key(j, "n_users", c.n_users);
    read_key(j, "symbol_duration", c.symbol_duration);
    read_key(j, "samples_per_symbol", c.samples_per_symbol);
    read_key(j, "eps_grid", c.eps_grid);
    if (j.contains("eps") && !j.at("eps").is_null()) c.eps = j.at("eps").get<double>();
    if (j.contains("sigma") && !j.at("sigma").is_null()) c.sigma = j.at("sigma").get<double>();
    read_key(j, "esn0_db", c.esn0_db);
    read_key(j, "load_k", c.load_k);
    read_key(j, "victim", c.victim);
    read_key(j, "segments", c.segments);
    read_key(j, "bins", c.bins);
    read_key(j, "ber_mode", c.ber_mode);
    read_key(j, "delay_reference", c.delay_reference);
    read_key(j, "samples", c.samples);
    read_key(j, "draws", c.draws);
    read_key(j, "convergence", c.convergence);
    read_key(j, "conv_m", c.conv_m);
    read_key(j, "conv_k", c.conv_k);
    read_key(j, "conv_eps", c.conv_eps);
    read_key(j, "conv_segments", c.conv_segments);
    read_key(j, "energies", c.energies);
    read_key(j, "bits", c.bits);
    read_key(j, "min_bits", c.min_bits);
    read_key(j, "target_errors", c.target_errors);
    read_key(j, "block_length", c.block_length);
    read_key(j, "subband", c.subband);
    read_key(j, "noise", c.noise);
    read_key(j, "seed", c.seed);
    read_key(j, "threads", c.threads);
    read_key(j, "out", c.out);
    return c;
}

RunOutput cmd_waveforms(const ExperimentConfig& c) {
    c.validate();
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_out_dir(c);
    std::deque<CsvFile> files;
    for (ChirpFamily fam : c.families) {
        const SignalSetSpec spec = c.spec(fam);
        const double h = spec.sample_interval();
        const std::string stem = std::string(to_string(fam)) + "_u";
        for (int m = 0; m < spec.n_users; ++m) {
            const ChirpWaveform w = synthesize(spec, m);
            const PhaseFunction fn(spec, m);
            CsvFile& samples = files.emplace_back(c, dir / ("waveform_" + stem + std::to_string(m) + ".csv"),
                                                  std::vector<std::string>{"t", "re", "im"});
            CsvFile& freq = files.emplace_back(c, dir / ("frequency_" + stem + std::to_string(m) + ".csv"),
                                               std::vector<std::string>{"t", "f"});
            for (std::size_t i = 0; i < w.samples.size(); ++i) {
                const double t = static_cast<double>(i) * h;
                samples.row({num(t), num(w.samples[i].real()), num(w.samples[i].imag())});
                freq.row({num(t), num(fn.frequency(t))});
            }
        }
    }
    RunOutput out;
    const double wall = seconds_since(start);
    for (const auto& f : files) out.files.push_back(f.write(wall));
    return out;
}

RunOutput cmd_xcorr(const ExperimentConfig& c) {
    c.validate();
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_out_dir(c);
    const std::vector<double> grid = c.eps_grid.empty() ? default_eps_grid() : c.eps_grid;
    StatsOptions opts;
    opts.segments = c.segments;
    opts.bins = c.bins;
    opts.threads = c.threads;

    CsvFile mean(c, dir / "xcorr_mean.csv", {"family", "eps_over_T", "mean_abs_rho"});
    CsvFile hist(c, dir / "xcorr_hist.csv", {"family", "bin_lo", "bin_hi", "count"});
    CsvFile conv(c, dir / "xcorr_convergence.csv", {"family", "m", "k", "eps_over_T", "M", "abs_error"});
    for (ChirpFamily fam : c.families) {
        const SignalSetSpec spec = c.spec(fam);
        const std::string name(to_string(fam));
        const CorrelationStats st = correlation_stats(spec, grid, opts);
        for (std::size_t i = 0; i < st.delays.size(); ++i) mean.row({name, num(st.delays[i]), num(st.mean_abs[i])});
        for (std::size_t b = 0; b < st.counts.size(); ++b) {
            hist.row({name, num(st.bin_edges[b]), num(st.bin_edges[b + 1]), num(static_cast<std::uint64_t>(st.counts[b]))});
        }
        if (c.convergence) {
            const double eps = c.conv_eps * spec.symbol_duration;
            const CorrelationResult ref = xcorr_quadrature(spec, c.conv_m, c.conv_k, eps);
            for (int m_seg : c.conv_segments) {
                const CorrelationResult seg = xcorr_segmented(spec, c.conv_m, c.conv_k, eps, m_seg);
                conv.row({name, num(c.conv_m), num(c.conv_k), num(c.conv_eps), num(m_seg),
                          num(std::abs(seg.value - ref.value))});
            }
        }
    }
    RunOutput out;
    const double wall = seconds_since(start);
    out.files.push_back(mean.write(wall));
    out.files.push_back(hist.write(wall));
    if (c.convergence) out.files.push_back(conv.write(wall));
    return out;
}

RunOutput cmd_ber(const ExperimentConfig& c) {
    c.validate();
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_out_dir(c);
    const bool averaged = c.ber_mode == "delay_avg";
    if (averaged && !c.sigma) throw std::invalid_argument("ber_mode delay_avg needs sigma");
    const double delay = averaged ? *c.sigma : c.eps.value_or(0.0);
    CsvFile csv(c, dir / "ber.csv",
                {"family", "N", averaged ? "sigma_over_T" : "eps_over_T", "EsN0_dB", "ber", "method", "ci_halfwidth"});

    for (ChirpFamily fam : c.families) {
        const SignalSetSpec spec = c.spec(fam);
        const double T = spec.symbol_duration;
        const std::vector<int> pool =
            c.load_k > 0 ? select_partial_load(spec.n_users, c.load_k) : select_partial_load(spec.n_users, spec.n_users);
        const std::vector<int> victims = victims_for(c, pool);
        if (c.ber_mode == "exact" && static_cast<int>(pool.size()) > kExactEnumerationCap) {
            throw EnumerationCapExceeded(static_cast<int>(pool.size()));
        }
        for (double db : c.esn0_db) {
            double p_sum = 0.0;
            double var_sum = 0.0;
            BerMethod method = BerMethod::Exact;
            for (std::size_t vi = 0; vi < victims.size(); ++vi) {
                InterferenceProfile prof;
                prof.victim = victims[vi];
                prof.victim_energy = c.energies.empty() ? 1.0 : c.energies.at(static_cast<std::size_t>(victims[vi]));
                prof.noise_density = 1.0 / db_to_linear(db);
                for (int u : pool) {
                    if (u == victims[vi]) continue;
                    const double e = c.energies.empty() ? 1.0 : c.energies.at(static_cast<std::size_t>(u));
                    prof.others.push_back({u, delay * T, e});
                }
                BerPoint p;
                if (c.ber_mode == "exact") {
                    p = ber_exact(prof, spec);
                } else if (c.ber_mode == "sampled") {
                    p = ber_sampled(prof, spec, c.samples, c.seed + vi);
                } else {
                    DelayAverageOptions opts;
                    opts.reference = parse_reference(c.delay_reference);
                    opts.hypotheses_per_draw = c.samples;
                    p = ber_gaussian_delay_avg(prof, spec, delay * T, c.draws, c.seed + vi, opts);
                }
                method = p.method;
                p_sum += p.probability;
                var_sum += p.ci_halfwidth * p.ci_halfwidth;
            }
            const double n = static_cast<double>(victims.size());
            csv.row({std::string(to_string(fam)), num(spec.n_users), num(delay), num(db), num(p_sum / n),
                     std::string(to_string(method)), num(std::sqrt(var_sum) / n)});
        }
    }
    RunOutput out;
    out.files.push_back(csv.write(seconds_since(start)));
    return out;
}

RunOutput cmd_sim(const ExperimentConfig& c) {
    c.validate();
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_out_dir(c);
    CsvFile csv(c, dir / "sim.csv", {"family", "N", "K", "sigma_over_T", "EbN0_dB", "ber", "errors", "bits", "seed"});
    for (ChirpFamily fam : c.families) {
        LinkConfig lc;
        lc.spec = c.spec(fam);
        const double T = lc.spec.symbol_duration;
        lc.n_active = c.load_k;
        const int k = c.load_k > 0 ? c.load_k : c.n_users;
        if (c.sigma) {
            lc.delays = DelayModel::gaussian(*c.sigma * T);
        } else if (c.eps) {
            std::vector<double> d;
            for (int i = 0; i < k; ++i) d.push_back(i * *c.eps * T);
            lc.delays = DelayModel::fixed_delays(std::move(d));
        }
        lc.energies = c.energies;
        lc.esn0_db = c.esn0_db;
        lc.max_bits = c.bits;
        lc.min_bits = c.min_bits;
        lc.target_errors = c.target_errors;
        lc.block_length = c.block_length;
        lc.seed = c.seed;
        lc.subband = c.subband == "shared" ? SubbandModel::SharedBaseband : SubbandModel::Channelized;
        lc.noise = c.noise == "per_sample" ? NoiseInjection::PerSample : NoiseInjection::CorrelatorProjected;
        lc.threads = c.threads;
        const SimResult r = run_link_sim(lc);
        for (const SimPoint& p : r.points) {
            csv.row({std::string(to_string(fam)), num(c.n_users), num(k), num(c.sigma.value_or(0.0)), num(p.esn0_db),
                     num(p.ber), num(p.errors), num(p.bits), num(c.seed)});
        }
    }
    RunOutput out;
    out.files.push_back(csv.write(seconds_since(start)));
    return out;
}

RunOutput run_experiment(const ExperimentConfig& config) {
    if (config.command == "waveforms") return cmd_waveforms(config);
    if (config.command == "xcorr") return cmd_xcorr(config);
    if (config.command == "ber") return cmd_ber(config);
    if (config.command == "sim") return cmd_sim(config);
    throw std::invalid_argument("unknown command '" + config.command + "'");
}

}  // namespace qscss
