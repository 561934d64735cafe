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
#include <string>
#include <vector>

#include "usctraj/hilbert.hpp"
#include "usctraj/model.hpp"

namespace usctraj {

struct DressedBasis {
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXcd eigenvectors;  // columns, product basis
    OperatorMatrix source_hamiltonian;
    double degeneracy_tolerance = 1e-9;

    const BasisLayout& layout() const { return source_hamiltonian.layout(); }
    int dimension() const { return static_cast<int>(eigenvalues.size()); }
    StateVector state(int k) const { return eigenvectors.col(k); }
    StateVector ground_state() const { return eigenvectors.col(0); }
    // Matrix of an operator in the dressed basis, V^dagger M V.
    Eigen::MatrixXcd to_dressed(const Eigen::MatrixXcd& m) const;
    Eigen::MatrixXcd from_dressed(const Eigen::MatrixXcd& m) const;
};

// Eigenvector phases are fixed by making the largest-magnitude component real and positive.
DressedBasis diagonalize(const OperatorMatrix& h, double degeneracy_tolerance = 1e-9);

// Sum over E_k > E_j + tol of <j|S|k> |j><k|, in the product basis.
OperatorMatrix positive_frequency(const OperatorMatrix& s, const DressedBasis& basis);

enum class Channel : int { cavity = 0, qubit1 = 1, qubit2 = 2, collective = 3 };
inline constexpr int channel_count = 4;
inline constexpr std::array<Channel, 4> all_channels = {Channel::cavity, Channel::qubit1, Channel::qubit2,
                                                        Channel::collective};

std::string to_string(Channel c);
Channel parse_channel(const std::string& s);

struct JumpChannel {
    Channel label = Channel::cavity;
    double rate = 0.0;
    OperatorMatrix plus;   // S+
    OperatorMatrix minus;  // S- = (S+)^dagger
};

// Cavity (kappa, X+), qubit1 (gamma1, C1+), qubit2 (gamma2, C2+), collective (gamma_c / 2, C1+ + C2+).
std::vector<JumpChannel> jump_channels(const SystemParams& p, const DressedBasis& basis);

// Hamiltonian, its dressed basis and the matching dissipation channels for one parameter set.
struct DissipativeSystem {
    SystemParams params;
    HamiltonianKind kind = HamiltonianKind::full;
    Omega2Mode omega2_mode = Omega2Mode::automatic;
    OperatorMatrix hamiltonian;
    DressedBasis basis;
    std::vector<JumpChannel> channels;

    const BasisLayout& layout() const { return hamiltonian.layout(); }
};

DissipativeSystem make_system(const SystemParams& p, const BasisLayout& layout,
                              HamiltonianKind kind = HamiltonianKind::full,
                              Omega2Mode mode = Omega2Mode::automatic);

// Labels: 1gg, 0ee, 0eg, 0ge, chi_plus, chi_minus, dressed_gs.
StateVector initial_state(const std::string& label, const DissipativeSystem& sys);
bool is_initial_state_label(const std::string& label);

}  // namespace usctraj
