// qscss: experiments on multi-user chirp spread spectrum.
//
//   qscss waveforms --family quartic --n-users 10 --out run1
//   qscss xcorr --family all --n-users 25 --convergence
//   qscss ber --family linear --n-users 2 --eps 0.1 --esn0-db 0,2,4,6,8
//   qscss sim --family quartic --n-users 10 --sigma 0.1 --esn0-db 12
//
// Delays (--eps, --sigma) are in units of the symbol duration T. Es/N0 and
// Eb/N0 coincide for binary signaling and are given in dB.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qscss/experiment.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::string> family;
    std::optional<int> n_users;
    std::optional<int> samples_per_symbol;
    std::optional<double> sigma;
    std::optional<double> eps;
    std::optional<std::string> esn0_db;
    std::optional<int> load_k;
    std::optional<int> victim;
    std::optional<int> segments;
    std::optional<std::uint64_t> bits;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> ber_mode;
    std::optional<std::uint64_t> samples;
    std::optional<std::uint64_t> draws;
    std::optional<unsigned> threads;
    bool convergence = false;
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "' in list");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return out;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON experiment config; flags override its values");
    cmd->add_option("--family", o.family, "linear | sinusoidal | quartic | all");
    cmd->add_option("--n-users", o.n_users, "Users N in the set");
    cmd->add_option("--samples-per-symbol", o.samples_per_symbol, "Samples per symbol (default max(64, 16N))");
    cmd->add_option("--sigma", o.sigma, "Gaussian delay spread, units of T");
    cmd->add_option("--eps", o.eps, "Fixed delay, units of T");
    cmd->add_option("--esn0-db", o.esn0_db, "Comma-separated Es/N0 grid in dB");
    cmd->add_option("--load-k", o.load_k, "Active users K (0: all)");
    cmd->add_option("--victim", o.victim, "Victim user (-1: average over users)");
    cmd->add_option("--segments", o.segments, "Segments M of the piecewise model");
    cmd->add_option("--bits", o.bits, "Bit budget per Es/N0 point");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--threads", o.threads, "Worker threads (0: hardware)");
}

qscss::ExperimentConfig build_config(const std::string& command, const Overrides& o) {
    nlohmann::json j = nlohmann::json::object();
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f) throw std::runtime_error("cannot read config " + o.config_path);
        j = nlohmann::json::parse(f);
    }
    if (j.contains("command") && j["command"] != command) {
        throw std::invalid_argument("config is for command '" + j["command"].get<std::string>() + "'");
    }
    j["command"] = command;
    if (o.family) {
        j.erase("families");
        j["family"] = *o.family;
    }
    if (o.n_users) j["n_users"] = *o.n_users;
    if (o.samples_per_symbol) j["samples_per_symbol"] = *o.samples_per_symbol;
    if (o.sigma) j["sigma"] = *o.sigma;
    if (o.eps) j["eps"] = *o.eps;
    if (o.esn0_db) j["esn0_db"] = parse_list(*o.esn0_db);
    if (o.load_k) j["load_k"] = *o.load_k;
    if (o.victim) j["victim"] = *o.victim;
    if (o.segments) j["segments"] = *o.segments;
    if (o.bits) j["bits"] = *o.bits;
    if (o.seed) j["seed"] = *o.seed;
    if (o.out) j["out"] = *o.out;
    if (o.ber_mode) j["ber_mode"] = *o.ber_mode;
    if (o.samples) j["samples"] = *o.samples;
    if (o.draws) j["draws"] = *o.draws;
    if (o.threads) j["threads"] = *o.threads;
    if (o.convergence) j["convergence"] = true;
    return qscss::ExperimentConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-user chirp spread spectrum experiments"};
    app.require_subcommand(1);
    Overrides o;

    auto* wf = app.add_subcommand("waveforms", "Export per-user samples and instantaneous frequency");
    add_common(wf, o);
    auto* xc = app.add_subcommand("xcorr", "Mean cross-correlation and histogram sweeps");
    add_common(xc, o);
    xc->add_flag("--convergence", o.convergence, "Also write the segment-count convergence table");
    auto* br = app.add_subcommand("ber", "Analytic bit error rate");
    add_common(br, o);
    br->add_option("--mode", o.ber_mode, "exact | sampled | delay_avg");
    br->add_option("--samples", o.samples, "Hypotheses drawn in sampled mode");
    br->add_option("--draws", o.draws, "Delay draws in delay_avg mode");
    auto* sm = app.add_subcommand("sim", "Monte Carlo link simulation");
    add_common(sm, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        const qscss::ExperimentConfig config = build_config(command, o);
        const qscss::RunOutput out = qscss::run_experiment(config);
        for (const auto& f : out.files) std::cerr << "wrote " << f.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "qscss: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
