// Copyright 2026 The usctraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "usctraj/analysis.hpp"
#include "usctraj/homodyne.hpp"
#include "usctraj/lme.hpp"
#include "usctraj/stats.hpp"

namespace usctraj::cli {

enum class Solver { mcwf, homodyne, mixed, lme };

Solver parse_solver(const std::string& s);
std::string to_string(Solver s);

struct RunConfig {
    Solver solver = Solver::mcwf;
    HamiltonianKind hamiltonian = HamiltonianKind::full;
    Propagator propagator = Propagator::exact;
    HomodyneDrift homodyne_drift = HomodyneDrift::standard;
    ChannelMask monitored = {true, false, false, false};  // homodyne channels of the mixed solver
    double t_final = 1000.0;
    double dt = 0.5;
    double record_interval = 10.0;
    std::size_t n_trajectories = 1;
    std::uint64_t master_seed = 1;
    std::uint64_t first_index = 0;
    std::string initial_state = "1gg";
    std::array<bool, 3> observables = {true, true, true};
    int max_jumps = -1;
    std::optional<Channel> require_first_jump;
    double window_after_first_jump = 0.0;
    std::size_t seed_scan_limit = 100000;
    std::size_t target_triggers = 0;  // ensemble: keep adding batches until this many trigger first jumps
    std::size_t batch_size = 10000;
};

struct OutputConfig {
    std::string directory = ".";
    std::string prefix = "usctraj";
    double first_jump_bin = 0.0;    // 0 disables the first-jump histogram
    double conditional_bin = 0.0;   // 0 disables the conditional histogram
    double conditional_window = 0.0;
    Channel trigger = Channel::qubit1;
    ChannelMask first_jump_channels = local_channels;
    ChannelMask conditional_channels = qubit_channels;
    RatioMode normalization = RatioMode::per_bin;
    bool jump_log = true;
};

struct SpectrumConfig {
    double delta_min = -0.3;
    double delta_max = 0.3;
    int points = 61;
    int levels = 6;
};

struct ExperimentConfig {
    SystemParams system;
    bool calibrate_omega_c = true;
    int n_fock = 10;
    Omega2Mode omega2_mode = Omega2Mode::automatic;
    RunConfig run;
    OutputConfig output;
    SpectrumConfig spectrum;

    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical INI text of a config. Parsing it back yields the same config.
std::string render_config(const ExperimentConfig& cfg);

struct PreparedSystem {
    ExperimentConfig config;  // omega_c resolved
    DissipativeSystem system;
    StateVector initial;
};

PreparedSystem prepare(const ExperimentConfig& cfg);

// Header lines (without comment markers) naming the code version and the resolved config.
std::string provenance(const ExperimentConfig& resolved, const std::string& command);

struct SpectrumResult {
    std::vector<double> delta;
    std::vector<double> omega_c_full;
    std::vector<double> omega_c_effective;
    std::vector<std::vector<double>> full_levels;       // excitation energies above the ground level
    std::vector<std::vector<double>> effective_levels;
    std::vector<double> doublet_gap;                    // full model, levels 1 and 2
    std::vector<double> omega2_magnitude;
};

SpectrumResult compute_spectrum(const ExperimentConfig& cfg);

struct TrajectoryResult {
    PreparedSystem prepared;
    TrajectoryRecord record;
    std::size_t scanned = 0;  // indices tried before one matched the required first jump
};

TrajectoryResult compute_trajectory(const ExperimentConfig& cfg, unsigned threads);

struct EnsembleResult {
    PreparedSystem prepared;
    std::vector<TrajectoryRecord> records;
    std::optional<EnsembleAverage> average;
    std::optional<JumpHistogram> first_jump;
    std::optional<JumpHistogram> conditional;
    std::optional<LmeSeries> lme;
};

EnsembleResult compute_ensemble(const ExperimentConfig& cfg, unsigned threads);

struct ComparisonResult {
    PreparedSystem prepared;
    LmeSeries lme;
    LmeSeries spectral_lme;  // finely sampled run used for band_prominence
    EnsembleAverage trajectories;
    std::array<double, 3> max_deviation{};     // |mean - lme|
    std::array<double, 3> max_z{};             // |mean - lme| / max(se, se_floor)
    std::array<double, 3> band_prominence{};   // LME series power at the exchange frequency over background
};

inline constexpr double standard_error_floor = 1e-6;

ComparisonResult compute_comparison(const ExperimentConfig& cfg, unsigned threads);

struct TruncationReport {
    int n_fock = 0;
    double omega_c_shift = 0.0;
    double max_level_shift = 0.0;
};

TruncationReport check_truncation(const ExperimentConfig& cfg);

// Writers. Each returns the paths written.
std::vector<std::filesystem::path> write_spectrum(const ExperimentConfig& cfg, const SpectrumResult& r,
                                                  const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_trajectory(const TrajectoryResult& r, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_ensemble(const EnsembleResult& r, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_comparison(const ComparisonResult& r, const std::filesystem::path& dir);
std::filesystem::path write_truncation(const ExperimentConfig& cfg, const TruncationReport& r,
                                       const std::filesystem::path& dir);

void write_series(std::ostream& out, const std::vector<double>& t, const std::array<std::vector<double>, 3>& values,
                  const std::array<bool, 3>& columns);
void write_jump_log(std::ostream& out, const std::vector<TrajectoryRecord>& records, const std::string& header);

}  // namespace usctraj::cli
