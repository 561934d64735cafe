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
#include <vector>

#include "usctraj/mcwf.hpp"

namespace usctraj {

class DensityMatrix {
public:
    DensityMatrix() = default;
    DensityMatrix(BasisLayout layout, Eigen::MatrixXcd entries);
    static DensityMatrix pure(const BasisLayout& layout, const StateVector& psi);

    const BasisLayout& layout() const { return layout_; }
    const Eigen::MatrixXcd& entries() const { return entries_; }
    cplx trace() const { return entries_.trace(); }
    double hermiticity_defect() const;
    double min_eigenvalue() const;
    cplx expectation(const Eigen::MatrixXcd& o) const { return (o * entries_).trace(); }

    // Hermitian within 1e-10, unit trace within 1e-8, eigenvalues above -1e-8.
    void validate() const;

private:
    BasisLayout layout_;
    Eigen::MatrixXcd entries_;
};

// -i[H, rho] + sum_m gamma_m (S+ rho S- - {S- S+, rho} / 2)
Eigen::MatrixXcd lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& h,
                              const std::vector<JumpChannel>& channels);

struct LmeOptions {
    double t_final = 1000.0;
    double dt = 0.5;
    double record_interval = 10.0;
    double positivity_tolerance = 1e-6;
};

struct LmeSeries {
    std::vector<double> time_grid;
    std::array<std::vector<double>, 3> expectations;
    DensityMatrix final_state;
    double max_trace_error = 0.0;
    double max_hermiticity_defect = 0.0;
    double min_eigenvalue = 1.0;
};

// Fourth-order Runge-Kutta on the dissipator with the Hamiltonian rotation integrated exactly
// in the eigenbasis of H (integrating-factor form). Positivity, trace and Hermiticity are
// checked at every record point.
LmeSeries evolve_lme(const DensityMatrix& rho0, const OperatorMatrix& h, const std::vector<JumpChannel>& channels,
                     const LmeOptions& opts);

}  // namespace usctraj
