#pragma once

// Reproducible experiment runs behind the command-line tool. A run is fully
// described by an ExperimentConfig, which is echoed into every CSV it writes
// (as leading '#' comment lines) and into a JSON manifest next to each CSV.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qscss/waveforms.hpp"

namespace qscss {

struct ExperimentConfig {
    std::string command;  // waveforms | xcorr | ber | sim
    std::vector<ChirpFamily> families{ChirpFamily::Linear};
    int n_users = 10;
    double symbol_duration = 1.0;
    int samples_per_symbol = 0;  // 0: max(64, 16 N)

    // Delays are in units of T.
    std::vector<double> eps_grid;  // xcorr sweep; empty: 0, 0.01, ..., 0.99
    std::optional<double> eps;     // ber / sim fixed delay
    std::optional<double> sigma;   // ber / sim Gaussian delay spread

    std::vector<double> esn0_db{0, 2, 4, 6, 8, 10, 12};
    int load_k = 0;  // 0: all users
    int victim = -1;  // -1: average over every (active) user
    int segments = 1024;
    int bins = 20;

    std::string ber_mode = "exact";  // exact | sampled | delay_avg
    std::string delay_reference = "victim";  // victim | all
    std::uint64_t samples = 100'000;  // hypotheses for sampled mode
    std::uint64_t draws = 200;        // delay draws for delay_avg

    bool convergence = false;
    int conv_m = 2;
    int conv_k = 5;
    double conv_eps = 0.2;
    std::vector<int> conv_segments{8, 32, 128, 512, 2048};

    std::vector<double> energies;  // per user; empty: all 1
    std::uint64_t bits = 1'000'000;
    std::uint64_t min_bits = 0;
    std::uint64_t target_errors = 200;
    int block_length = 64;
    std::string subband = "channelized";  // channelized | shared
    std::string noise = "projected";      // projected | per_sample

    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out = "out";

    SignalSetSpec spec(ChirpFamily family) const;
    void validate() const;

    nlohmann::json to_json() const;
    // Unknown keys are rejected. Missing keys keep their defaults.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct RunOutput {
    std::vector<std::filesystem::path> files;  // CSVs written
};

RunOutput cmd_waveforms(const ExperimentConfig& config);
RunOutput cmd_xcorr(const ExperimentConfig& config);
RunOutput cmd_ber(const ExperimentConfig& config);
RunOutput cmd_sim(const ExperimentConfig& config);

// Dispatches on config.command.
RunOutput run_experiment(const ExperimentConfig& config);

// Shortest round-trip decimal representation.
std::string format_number(double value);

}  // namespace qscss
