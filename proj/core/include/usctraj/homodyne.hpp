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

#include "usctraj/mcwf.hpp"

namespace usctraj {

// Per-channel Wiener increments with variance dt, drawn from a stream separate from the jump draws.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t index);
    double increment(double dt) { return std::sqrt(dt) * rng_.normal(); }

private:
    RngStream rng_;
};

enum class HomodyneDrift {
    as_printed,  // -(i/2) sum_m [gamma_m^2 <S- - S+> dt + gamma_m dW_m] S+_m
    standard,    // sum_m [(gamma_m x_m / 2) dt + sqrt(gamma_m) dW_m] (S+_m - x_m / 2), x_m = <S+ + S->
};

HomodyneDrift parse_homodyne_drift(const std::string& s);
std::string to_string(HomodyneDrift d);

// Channels with monitored[m] true are read out by homodyne detection, the others by photodetection.
class HomodyneEngine {
public:
    HomodyneEngine(const DissipativeSystem& sys, double dt, std::array<bool, 4> monitored,
                   HomodyneDrift drift = HomodyneDrift::standard);

    // signal, when given, accumulates the homodyne record increment dY_m = sqrt(gamma_m) x_m dt + dW_m.
    std::optional<JumpEvent> step(StateVector& psi, double t_end, RngStream& rng, NoiseStream& noise,
                                  std::array<double, 4>* signal = nullptr) const;

    const McwfEngine& base() const { return base_; }
    double dt() const { return base_.dt(); }
    const std::array<bool, 4>& monitored() const { return monitored_; }
    HomodyneDrift drift() const { return drift_; }

    // Bound on |d<O>| over one step for a continuous evolution with |dW| below six standard deviations.
    double step_change_bound(const Eigen::MatrixXcd& o) const;

private:
    McwfEngine base_;
    std::array<bool, 4> monitored_;
    HomodyneDrift drift_;
    Eigen::MatrixXcd jump_decay_;  // photodetected part of sum_m gamma_m S-S+
};

TrajectoryRecord run_homodyne_trajectory(const HomodyneEngine& engine, const StateVector& psi0,
                                         const TrajectoryOptions& opts, std::uint64_t master_seed,
                                         std::uint64_t index);

std::vector<TrajectoryRecord> run_homodyne_ensemble(const HomodyneEngine& engine, const StateVector& psi0,
                                                    const TrajectoryOptions& opts, std::size_t n,
                                                    std::uint64_t master_seed, unsigned threads = 0,
                                                    std::uint64_t first_index = 0);

}  // namespace usctraj
