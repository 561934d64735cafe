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


#include <benchmark/benchmark.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "usctraj/dressed.hpp"
#include "usctraj/homodyne.hpp"
#include "usctraj/lme.hpp"
#include "usctraj/mcwf.hpp"
#include "usctraj/model.hpp"

namespace {

using namespace usctraj;

SystemParams standard_params() {
    SystemParams p;
    p.g = 0.1;
    p.kappa = p.gamma1 = p.gamma2 = 4e-5;
    p.gamma_c = 4e-5;
    return p;
}

DissipativeSystem standard_system(int n_fock, HamiltonianKind kind = HamiltonianKind::full) {
    const BasisLayout l = build_layout(n_fock);
    return make_system(calibrate_resonance(standard_params(), l), l, kind);
}

void bm_diagonalize(benchmark::State& state) {
    const SystemParams p = standard_params();
    const BasisLayout l = build_layout(static_cast<int>(state.range(0)));
    const OperatorMatrix h = full_hamiltonian(p, l);
    for (auto _ : state) benchmark::DoNotOptimize(diagonalize(h));
}
BENCHMARK(bm_diagonalize)->Arg(4)->Arg(8)->Arg(16);

void bm_make_system(benchmark::State& state) {
    const SystemParams p = standard_params();
    const BasisLayout l = build_layout(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(make_system(p, l));
}
BENCHMARK(bm_make_system)->Arg(4)->Arg(8);

void bm_expm(benchmark::State& state) {
    const DissipativeSystem sys = standard_system(static_cast<int>(state.range(0)));
    const Eigen::MatrixXcd a = std::complex<double>(0.0, -0.5) * sys.hamiltonian.entries();
    for (auto _ : state) {
        Eigen::MatrixXcd u = a.exp();
        benchmark::DoNotOptimize(u.data());
    }
}
BENCHMARK(bm_expm)->Arg(4)->Arg(8);

void bm_mcwf_step(benchmark::State& state) {
    const DissipativeSystem sys = standard_system(4);
    const McwfEngine e(sys, 0.5, state.range(0) ? Propagator::exact : Propagator::first_order);
    StateVector psi = initial_state("1gg", sys);
    RngStream rng(1, 0);
    double t = 0.0;
    for (auto _ : state) {
        t += 0.5;
        benchmark::DoNotOptimize(e.step(psi, t, rng));
    }
}
BENCHMARK(bm_mcwf_step)->Arg(0)->Arg(1);

void bm_homodyne_step(benchmark::State& state) {
    const DissipativeSystem sys = standard_system(4);
    const HomodyneEngine e(sys, 0.1, {false, true, true, false});
    StateVector psi = initial_state("1gg", sys);
    RngStream rng(1, 0);
    NoiseStream noise(1, 0);
    double t = 0.0;
    for (auto _ : state) {
        t += 0.1;
        benchmark::DoNotOptimize(e.step(psi, t, rng, noise));
    }
}
BENCHMARK(bm_homodyne_step);

void bm_lme_rhs(benchmark::State& state) {
    const DissipativeSystem sys = standard_system(static_cast<int>(state.range(0)));
    const DensityMatrix rho = DensityMatrix::pure(sys.layout(), initial_state("1gg", sys));
    for (auto _ : state) {
        Eigen::MatrixXcd d = lindblad_rhs(rho, sys.hamiltonian, sys.channels);
        benchmark::DoNotOptimize(d.data());
    }
}
BENCHMARK(bm_lme_rhs)->Arg(4)->Arg(8);

void bm_trajectory(benchmark::State& state) {
    const DissipativeSystem sys = standard_system(4);
    const McwfEngine e(sys, 0.5);
    const StateVector psi0 = initial_state("1gg", sys);
    TrajectoryOptions opts;
    opts.t_final = 5000.0;
    opts.record_interval = 10.0;
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(e, psi0, opts, 7, i++));
}
BENCHMARK(bm_trajectory)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
