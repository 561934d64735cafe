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

#include <numbers>
#include <string>
#include <vector>

#include "usctraj/hilbert.hpp"

namespace usctraj {

// Frequencies and rates in units of omega0.
struct SystemParams {
    double omega0 = 1.0;
    double delta = 0.0;  // half splitting: omega_q1 - omega_q2 = 2 delta
    double omega_c = 2.0;
    double g = 0.1;
    double theta = std::numbers::pi / 6.0;
    double kappa = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma_c = 0.0;

    double omega_q1() const { return omega0 + delta; }
    double omega_q2() const { return omega0 - delta; }

    // Throws config_error on negative rates or non-positive omega0.
    void validate() const;
    // Human-readable notes when g is not small against the cavity-qubit detunings.
    std::vector<std::string> warnings() const;
};

enum class Omega2Mode { automatic, always, never };

Omega2Mode parse_omega2_mode(const std::string& s);
std::string to_string(Omega2Mode m);

struct EffectiveCouplings {
    double omega2 = 0.0;            // qubit-qubit exchange in use (0 when dropped)
    double omega2_resonant = 0.0;   // -4 g^2 cos^2(theta) / (3 omega0)
    bool omega2_active = false;
    double omega3 = 0.0;            // one-photon two-qubit coupling
    double chi1 = 0.0;              // dispersive pull, chi_i sz_i (a^dag a + 1/2)
    double chi2 = 0.0;
    double zz = 0.0;                // coefficient of (sz1 + sz2)^2
    // Relative dressing of the resonant pair: shift_1gg = -shift_0ee.
    double shift_1gg = 0.0;
    double shift_0ee = 0.0;
};

EffectiveCouplings effective_couplings(const SystemParams& p, Omega2Mode mode = Omega2Mode::automatic);

OperatorMatrix full_hamiltonian(const SystemParams& p, const BasisLayout& layout);
OperatorMatrix effective_hamiltonian(const SystemParams& p, const BasisLayout& layout,
                                     Omega2Mode mode = Omega2Mode::automatic);

enum class HamiltonianKind { full, effective };

HamiltonianKind parse_hamiltonian_kind(const std::string& s);
std::string to_string(HamiltonianKind k);

OperatorMatrix build_hamiltonian(const SystemParams& p, const BasisLayout& layout, HamiltonianKind kind,
                                 Omega2Mode mode = Omega2Mode::automatic);

// Cavity frequency at which |1,g,g> and |0,e,e> are degenerate under the effective Hamiltonian.
double effective_resonance(const SystemParams& p);

struct ResonancePair {
    int lower = 0;
    int upper = 0;
    double gap = 0.0;
};

// The two eigenlevels carrying the most |1,g,g> + |0,e,e> weight.
ResonancePair resonance_pair(const SystemParams& p, const BasisLayout& layout);

struct CalibrationOptions {
    double window = 0.25;
    int coarse_points = 51;
    double tolerance = 1e-7;
};

// Returns p with omega_c tuned to minimize the full-model |1,g,g> / |0,e,e> splitting.
SystemParams calibrate_resonance(const SystemParams& p, const BasisLayout& layout,
                                 const CalibrationOptions& opts = {});
SystemParams calibrate_resonance(const SystemParams& p, const BasisLayout& layout, HamiltonianKind kind,
                                 const CalibrationOptions& opts = {});

}  // namespace usctraj
