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

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "usctraj/model.hpp"

namespace usctraj {

// Couplings and rates that drive the two-level blocks {|1,g,g>, |0,e,e>} and {|0,e,g>, |0,g,e>}.
struct SubspaceRates {
    double omega2 = 0.0;       // exchange coupling in use
    double omega3 = 0.0;
    double kappa = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma_c = 0.0;
    double qq_detuning = 0.0;  // half the |0,e,g> - |0,g,e> splitting of the effective Hamiltonian

    double big_gamma() const { return gamma1 + gamma2 + gamma_c; }
    double delta_gamma() const { return gamma1 - gamma2; }
};

SubspaceRates subspace_rates(const SystemParams& p, Omega2Mode mode = Omega2Mode::automatic);

// eta = sqrt((4 omega3)^2 - (kappa - Gamma)^2), principal branch.
std::complex<double> eta(const SubspaceRates& r);

// No-jump propagator on (|1,g,g>, |0,e,e>) in the frame rotating at the common level energy.
Eigen::Matrix2cd u_1p2a(double t, const SubspaceRates& r);

// Normalized (<X-X+>, <C_i-C_i+>) after no-jump evolution from |1,g,g>.
std::pair<double, double> expectations_1p2a(double t, const SubspaceRates& r);

// Rational form valid for real eta (kappa, Gamma and omega3 with |kappa - Gamma| < 4 |omega3|).
std::pair<double, double> expectations_1p2a_rational(double t, const SubspaceRates& r);

enum class QqConvention {
    consistent,  // zeta^2 = (4 omega2 - i gamma_c)^2 - (delta_gamma + 4 i d)^2
    as_printed,  // zeta^2 = (4 omega2 - i gamma_c)^2 - (delta_gamma + i d)^2
};

std::complex<double> zeta(const SubspaceRates& r, QqConvention conv = QqConvention::consistent);

// No-jump propagator on (|0,e,g>, |0,g,e>) in the frame rotating at the mean level energy.
Eigen::Matrix2cd u_qq(double t, const SubspaceRates& r, QqConvention conv = QqConvention::consistent);

// Normalized (<C1-C1+>, <C2-C2+>) for a general initial qubit-manifold state, written as
// a real combination of cosh, cos, sinh and sin of Re/Im(zeta) t / 2.
std::pair<double, double> qq_expectations(double t, const SubspaceRates& r, std::complex<double> c_eg,
                                          std::complex<double> c_ge);

// Unnormalized no-jump survival probability |U(t) c|^2 in the qubit manifold.
double qq_survival(double t, const SubspaceRates& r, std::complex<double> c_eg, std::complex<double> c_ge);

// Start -i|0,g,e> (qubit 1 emitted). Uses the rational form when gamma_c = 0 and d = 0,
// the damped-cosine form for identical qubits with gamma_c > 0, and qq_expectations otherwise.
std::pair<double, double> qq_expectations_after_local_jump(double t, const SubspaceRates& r);

// Start -i(|0,g,e> + |0,e,g>)/sqrt(2) (collective emission).
std::pair<double, double> qq_expectations_after_collective_jump(double t, const SubspaceRates& r);

// Rational local-jump form for gamma_c = 0, d = 0 and real zeta.
std::pair<double, double> qq_local_jump_rational(double t, const SubspaceRates& r);

// Identical qubits with collective decay: 1/2 -/+ exp(-gamma_c t / 2) cos(2 omega2 t) / (1 + exp(-gamma_c t)).
std::pair<double, double> qq_local_jump_identical_collective(double t, const SubspaceRates& r);

}  // namespace usctraj
