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

#include <doctest.h>

#include <cmath>

#include "usctraj/errors.hpp"
#include "usctraj/lme.hpp"

using namespace usctraj;

namespace {

DissipativeSystem make(double delta, double gamma, double gamma_c, HamiltonianKind kind = HamiltonianKind::full) {
    SystemParams p;
    p.g = 0.1;
    p.delta = delta;
    p.kappa = p.gamma1 = p.gamma2 = gamma;
    p.gamma_c = gamma_c;
    const BasisLayout l = build_layout(4);
    return make_system(calibrate_resonance(p, l, kind), l, kind);
}

DensityMatrix random_state(const BasisLayout& l, unsigned seed) {
    std::srand(seed);
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(l.dimension(), l.dimension());
    Eigen::MatrixXcd rho = a * a.adjoint();
    rho /= rho.trace();
    return DensityMatrix(l, rho);
}

}  // namespace

TEST_CASE("dressed ground state is stationary") {
    const DissipativeSystem sys = make(0.1, 4e-3, 2e-3);
    const DensityMatrix gs = DensityMatrix::pure(sys.layout(), sys.basis.ground_state());
    CHECK(lindblad_rhs(gs, sys.hamiltonian, sys.channels).cwiseAbs().maxCoeff() < 1e-10);

    LmeOptions o;
    o.t_final = 2000.0;
    o.record_interval = 100.0;
    const LmeSeries s = evolve_lme(gs, sys.hamiltonian, sys.channels, o);
    for (const auto& series : s.expectations) {
        for (double v : series) CHECK(std::abs(v) < 1e-10);
    }
}

TEST_CASE("generator is trace-free and preserves hermiticity") {
    const DissipativeSystem sys = make(0.15, 4e-3, 2e-3);
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const DensityMatrix rho = random_state(sys.layout(), seed);
        const Eigen::MatrixXcd d = lindblad_rhs(rho, sys.hamiltonian, sys.channels);
        CHECK(std::abs(d.trace()) < 1e-12);
        CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("bare qubit population decays exponentially") {
    SystemParams p;
    p.g = 0.0;
    p.omega_c = 2.0;
    p.gamma1 = 2e-3;
    const BasisLayout l = build_layout(2);
    const DissipativeSystem sys = make_system(p, l);
    LmeOptions o;
    o.t_final = 1000.0;
    o.record_interval = 50.0;
    const LmeSeries s = evolve_lme(DensityMatrix::pure(l, l.ket(0, Qubit::e, Qubit::g)), sys.hamiltonian,
                                   sys.channels, o);
    REQUIRE(s.time_grid.size() == 21);
    for (std::size_t i = 0; i < s.time_grid.size(); ++i) {
        CHECK(std::abs(s.expectations[1][i] - std::exp(-p.gamma1 * s.time_grid[i])) < 1e-6);
        CHECK(std::abs(s.expectations[2][i]) < 1e-12);
    }
}

TEST_CASE("evolution keeps a valid density matrix") {
    const DissipativeSystem sys = make(0.0, 4e-5, 4e-5);
    LmeOptions o;
    o.t_final = 10000.0;
    o.record_interval = 100.0;
    const LmeSeries s = evolve_lme(DensityMatrix::pure(sys.layout(), initial_state("1gg", sys)),
                                   sys.hamiltonian, sys.channels, o);
    CHECK(s.max_trace_error < 1e-8);
    CHECK(s.max_hermiticity_defect < 1e-10);
    CHECK(s.min_eigenvalue > -1e-8);
    CHECK_NOTHROW(s.final_state.validate());
    CHECK(s.time_grid.back() == doctest::Approx(o.t_final));
}

TEST_CASE("effective and full models agree on the ensemble exchange") {
    LmeOptions o;
    o.t_final = 3000.0;
    o.record_interval = 50.0;
    const DissipativeSystem full = make(0.0, 4e-5, 0.0);
    const DissipativeSystem eff = make(0.0, 4e-5, 0.0, HamiltonianKind::effective);
    const LmeSeries a = evolve_lme(DensityMatrix::pure(full.layout(), initial_state("1gg", full)), full.hamiltonian,
                                   full.channels, o);
    const LmeSeries b = evolve_lme(DensityMatrix::pure(eff.layout(), initial_state("1gg", eff)), eff.hamiltonian,
                                   eff.channels, o);
    for (std::size_t i = 0; i < a.time_grid.size(); ++i) {
        CHECK(std::abs(a.expectations[0][i] + a.expectations[1][i] - b.expectations[0][i] - b.expectations[1][i]) <
              0.05);
    }
}

TEST_CASE("density matrix validation") {
    const BasisLayout l = build_layout(2);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(8, 8);
    m(0, 0) = 0.5;
    CHECK_THROWS_AS(DensityMatrix(l, m).validate(), numerical_inconsistency);
    m(1, 1) = 0.5;
    CHECK_NOTHROW(DensityMatrix(l, m).validate());
    m(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix(l, m).validate(), numerical_inconsistency);
    CHECK_THROWS_AS(DensityMatrix(l, Eigen::MatrixXcd::Identity(4, 4) / 4.0), dimension_mismatch);
    Eigen::MatrixXcd neg = Eigen::MatrixXcd::Zero(8, 8);
    neg(0, 0) = 1.2;
    neg(1, 1) = -0.2;
    CHECK_THROWS_AS(DensityMatrix(l, neg).validate(), numerical_inconsistency);
}

TEST_CASE("unstable step sizes are reported") {
    const DissipativeSystem sys = make(0.0, 2.0, 0.0);
    LmeOptions o;
    o.t_final = 200.0;
    o.dt = 5.0;
    o.record_interval = 10.0;
    CHECK_THROWS_AS(evolve_lme(DensityMatrix::pure(sys.layout(), initial_state("1gg", sys)), sys.hamiltonian,
                               sys.channels, o),
                    integrator_instability);
}
