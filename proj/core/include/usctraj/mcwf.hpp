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
#include <optional>
#include <string>
#include <vector>

#include "usctraj/dressed.hpp"
#include "usctraj/rng.hpp"

namespace usctraj {

// H - (i/2) sum_m gamma_m S-_m S+_m
OperatorMatrix non_hermitian_hamiltonian(const OperatorMatrix& h, const std::vector<JumpChannel>& channels);

// Dressed number operators X-X+, C1-C1+, C2-C2+ in the product basis.
struct Observables {
    static constexpr int count = 3;
    std::array<Eigen::MatrixXcd, 3> ops;
    static const std::array<const char*, 3>& names();
};

Observables make_observables(const std::vector<JumpChannel>& channels);
std::array<double, 3> measure(const Observables& obs, const StateVector& psi);

enum class Propagator { exact, first_order };

Propagator parse_propagator(const std::string& s);
std::string to_string(Propagator p);

struct JumpEvent {
    double time = 0.0;
    Channel channel = Channel::cavity;
    std::array<double, 4> probabilities{};  // dp_m at the firing step
};

class McwfEngine {
public:
    McwfEngine(const DissipativeSystem& sys, double dt, Propagator prop = Propagator::exact);
    McwfEngine(const OperatorMatrix& h, std::vector<JumpChannel> channels, double dt,
               Propagator prop = Propagator::exact);

    // Advances psi by dt. t_end is the time stamped on a jump fired in this step.
    std::optional<JumpEvent> step(StateVector& psi, double t_end, RngStream& rng) const;

    // Unnormalized no-jump propagation by one step.
    void propagate(StateVector& psi) const { psi = propagator_ * psi; }
    double jump_probability(const StateVector& psi) const;
    std::array<double, 4> channel_probabilities(const StateVector& psi) const;

    double dt() const { return dt_; }
    Propagator propagator_kind() const { return kind_; }
    const Eigen::MatrixXcd& propagator() const { return propagator_; }
    const OperatorMatrix& effective_hamiltonian() const { return h_eff_; }
    const Eigen::MatrixXcd& decay_operator() const { return decay_; }
    const std::vector<JumpChannel>& channels() const { return channels_; }
    const Observables& observables() const { return observables_; }

private:
    double dt_;
    Propagator kind_;
    std::vector<JumpChannel> channels_;
    OperatorMatrix h_eff_;
    Eigen::MatrixXcd decay_;  // sum_m gamma_m S-_m S+_m
    Eigen::MatrixXcd propagator_;
    Observables observables_;
};

struct TrajectoryOptions {
    double t_final = 1000.0;
    double record_interval = 0.0;  // 0 disables the expectation series
    int max_jumps = -1;            // stop after this many jumps; -1 runs to t_final
    std::optional<Channel> required_first_jump;  // stop as soon as the first jump is another channel
    double window_after_first_jump = 0.0;        // > 0: stop this long after the first jump
    bool keep_final_state = true;
};

struct TrajectoryRecord {
    SystemParams params;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    std::vector<double> time_grid;
    std::array<std::vector<double>, 3> expectations;
    std::vector<JumpEvent> jumps;
    StateVector final_state;
    double final_time = 0.0;
    // Integrated homodyne signal per channel and recording interval (diffusive runs only).
    std::array<std::vector<double>, 4> homodyne_current;
};

// Record grid k * record_interval, k = 0..K, with K = floor(t_final / record_interval).
std::vector<double> record_grid(double t_final, double record_interval);

TrajectoryRecord run_trajectory(const McwfEngine& engine, const StateVector& psi0, const TrajectoryOptions& opts,
                                std::uint64_t master_seed, std::uint64_t index);

TrajectoryRecord run_trajectory(const SystemParams& p, const StateVector& psi0, double t_final, double dt,
                                std::uint64_t seed, HamiltonianKind kind, int n_fock = 10);

struct EnsembleAverage {
    std::vector<double> time_grid;
    std::array<std::vector<double>, 3> mean;
    std::array<std::vector<double>, 3> std_error;
    std::size_t count = 0;
};

EnsembleAverage ensemble_average(const std::vector<TrajectoryRecord>& records);

// Trajectories first_index .. first_index + n - 1, each seeded by (master_seed, index).
std::vector<TrajectoryRecord> run_ensemble(const McwfEngine& engine, const StateVector& psi0,
                                           const TrajectoryOptions& opts, std::size_t n,
                                           std::uint64_t master_seed, unsigned threads = 0,
                                           std::uint64_t first_index = 0);

}  // namespace usctraj
