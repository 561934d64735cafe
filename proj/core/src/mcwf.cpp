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

#include "usctraj/mcwf.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "usctraj/errors.hpp"
#include "usctraj/parallel.hpp"

namespace usctraj {

OperatorMatrix non_hermitian_hamiltonian(const OperatorMatrix& h, const std::vector<JumpChannel>& channels) {
    Eigen::MatrixXcd m = h.entries();
    for (const JumpChannel& c : channels) {
        if (c.plus.dimension() != h.dimension()) throw dimension_mismatch("channel and Hamiltonian dimensions differ");
        if (c.rate == 0.0) continue;
        m -= cplx(0.0, 0.5 * c.rate) * (c.minus.entries() * c.plus.entries());
    }
    return OperatorMatrix(h.layout(), std::move(m), false);
}

const std::array<const char*, 3>& Observables::names() {
    static const std::array<const char*, 3> n = {"XmXp", "C1mC1p", "C2mC2p"};
    return n;
}

Observables make_observables(const std::vector<JumpChannel>& channels) {
    Observables obs;
    for (const JumpChannel& c : channels) {
        const int k = static_cast<int>(c.label);
        if (k < 3) obs.ops[k] = c.minus.entries() * c.plus.entries();
    }
    return obs;
}

std::array<double, 3> measure(const Observables& obs, const StateVector& psi) {
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) out[k] = psi.dot(obs.ops[k] * psi).real();
    return out;
}

Propagator parse_propagator(const std::string& s) {
    if (s == "exact") return Propagator::exact;
    if (s == "first_order") return Propagator::first_order;
    throw config_error("unknown propagator '" + s + "' (expected exact or first_order)");
}

std::string to_string(Propagator p) { return p == Propagator::exact ? "exact" : "first_order"; }

McwfEngine::McwfEngine(const DissipativeSystem& sys, double dt, Propagator prop)
    : McwfEngine(sys.hamiltonian, sys.channels, dt, prop) {}

McwfEngine::McwfEngine(const OperatorMatrix& h, std::vector<JumpChannel> channels, double dt, Propagator prop)
    : dt_(dt), kind_(prop), channels_(std::move(channels)) {
    if (!(dt > 0.0)) throw config_error("dt must be positive");
    h_eff_ = non_hermitian_hamiltonian(h, channels_);
    const int dim = h.dimension();
    decay_ = Eigen::MatrixXcd::Zero(dim, dim);
    for (const JumpChannel& c : channels_) {
        if (c.rate != 0.0) decay_ += c.rate * (c.minus.entries() * c.plus.entries());
    }
    const Eigen::MatrixXcd a = cplx(0.0, -dt) * h_eff_.entries();
    if (prop == Propagator::exact) {
        propagator_ = a.exp();
    } else {
        propagator_ = Eigen::MatrixXcd::Identity(dim, dim) + a;
    }
    observables_ = make_observables(channels_);
}

double McwfEngine::jump_probability(const StateVector& psi) const {
    return dt_ * psi.dot(decay_ * psi).real();
}

std::array<double, 4> McwfEngine::channel_probabilities(const StateVector& psi) const {
    std::array<double, 4> dp{};
    for (const JumpChannel& c : channels_) {
        if (c.rate == 0.0) continue;
        dp[static_cast<int>(c.label)] = dt_ * c.rate * (c.plus.entries() * psi).squaredNorm();
    }
    return dp;
}

std::optional<JumpEvent> McwfEngine::step(StateVector& psi, double t_end, RngStream& rng) const {
    const double total = jump_probability(psi);
    if (total >= 1.0) {
        throw timestep_too_large("total jump probability " + std::to_string(total) + " per step at dt = " +
                                 std::to_string(dt_));
    }
    if (total >= 0.1) {
        for (double d : channel_probabilities(psi)) {
            if (d >= 0.1) {
                throw timestep_too_large("channel jump probability " + std::to_string(d) +
                                         " exceeds 0.1 per step at dt = " + std::to_string(dt_));
            }
        }
    }
    const double eps = rng.uniform();
    if (!(eps < total)) {
        StateVector next = propagator_ * psi;
        psi = next / next.norm();
        return std::nullopt;
    }

    JumpEvent ev;
    ev.time = t_end;
    ev.probabilities = channel_probabilities(psi);
    double sum = 0.0;
    for (double d : ev.probabilities) sum += d;
    const double target = rng.uniform() * sum;
    int chosen = -1;
    double acc = 0.0;
    for (int m = 0; m < channel_count; ++m) {
        if (ev.probabilities[m] == 0.0) continue;
        acc += ev.probabilities[m];
        chosen = m;
        if (target < acc) break;
    }
    if (chosen < 0) throw numerical_inconsistency("jump branch selected with all channel probabilities zero");
    const JumpChannel* ch = nullptr;
    for (const JumpChannel& c : channels_) {
        if (static_cast<int>(c.label) == chosen) ch = &c;
    }
    StateVector next = ch->plus.entries() * psi;
    const double n = next.norm();
    if (n < 1e-14) {
        throw numerical_inconsistency("jump through " + to_string(ch->label) + " produced a state of norm " +
                                      std::to_string(n));
    }
    psi = next / n;
    ev.channel = ch->label;
    return ev;
}

std::vector<double> record_grid(double t_final, double record_interval) {
    std::vector<double> grid;
    if (!(record_interval > 0.0)) return grid;
    const auto k_max = static_cast<long>(std::floor(t_final / record_interval + 1e-9));
    grid.reserve(k_max + 1);
    for (long k = 0; k <= k_max; ++k) grid.push_back(k * record_interval);
    return grid;
}

namespace {

long steps_for(double span, double dt, const char* what) {
    const double r = span / dt;
    const long n = std::lround(r);
    if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
        throw config_error(std::string(what) + " must be an integer multiple of dt");
    }
    return n;
}

}  // namespace

TrajectoryRecord run_trajectory(const McwfEngine& engine, const StateVector& psi0, const TrajectoryOptions& opts,
                                std::uint64_t master_seed, std::uint64_t index) {
    const double dt = engine.dt();
    const long n_steps = steps_for(opts.t_final, dt, "t_final");
    const long rec_every = opts.record_interval > 0.0 ? steps_for(opts.record_interval, dt, "record_interval") : 0;
    const bool early_stop = opts.max_jumps >= 0 || opts.required_first_jump || opts.window_after_first_jump > 0.0;
    if (rec_every > 0 && early_stop) {
        throw config_error("early-stopping options cannot be combined with an expectation series");
    }
    if (psi0.size() != engine.effective_hamiltonian().dimension()) {
        throw dimension_mismatch("initial state size does not match the Hilbert space");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw config_error("initial state must be normalized");

    TrajectoryRecord rec;
    rec.seed = master_seed;
    rec.index = index;
    RngStream rng(master_seed, index);
    StateVector psi = psi0;

    auto record = [&](double t) {
        const auto v = measure(engine.observables(), psi);
        rec.time_grid.push_back(t);
        for (int k = 0; k < 3; ++k) rec.expectations[k].push_back(v[k]);
    };
    if (rec_every > 0) {
        const std::size_t n_rec = n_steps / rec_every + 1;
        rec.time_grid.reserve(n_rec);
        for (auto& e : rec.expectations) e.reserve(n_rec);
        record(0.0);
    }

    double t = 0.0;
    for (long s = 1; s <= n_steps; ++s) {
        t = s * dt;
        if (auto jump = engine.step(psi, t, rng)) {
            rec.jumps.push_back(*jump);
            const int n_jumps = static_cast<int>(rec.jumps.size());
            if (opts.max_jumps >= 0 && n_jumps >= opts.max_jumps) break;
            if (n_jumps == 1 && opts.required_first_jump && jump->channel != *opts.required_first_jump) break;
        }
        if (rec_every > 0 && s % rec_every == 0) record(t);
        if (opts.window_after_first_jump > 0.0 && !rec.jumps.empty() &&
            t - rec.jumps.front().time >= opts.window_after_first_jump) {
            break;
        }
    }
    rec.final_time = t;
    if (opts.keep_final_state) rec.final_state = psi;
    return rec;
}

TrajectoryRecord run_trajectory(const SystemParams& p, const StateVector& psi0, double t_final, double dt,
                                std::uint64_t seed, HamiltonianKind kind, int n_fock) {
    const DissipativeSystem sys = make_system(p, build_layout(n_fock), kind);
    const McwfEngine engine(sys, dt);
    TrajectoryOptions opts;
    opts.t_final = t_final;
    opts.record_interval = dt;
    TrajectoryRecord rec = run_trajectory(engine, psi0, opts, seed, 0);
    rec.params = p;
    return rec;
}

EnsembleAverage ensemble_average(const std::vector<TrajectoryRecord>& records) {
    if (records.empty()) throw config_error("ensemble_average needs at least one record");
    EnsembleAverage avg;
    avg.time_grid = records.front().time_grid;
    avg.count = records.size();
    const std::size_t m = avg.time_grid.size();
    for (const TrajectoryRecord& r : records) {
        if (r.time_grid != avg.time_grid) throw dimension_mismatch("trajectory records have different time grids");
    }
    const double n = static_cast<double>(records.size());
    for (int k = 0; k < 3; ++k) {
        std::vector<double>& mean = avg.mean[k];
        std::vector<double> ss(m, 0.0);
        mean.assign(m, 0.0);
        for (const TrajectoryRecord& r : records) {
            for (std::size_t i = 0; i < m; ++i) mean[i] += r.expectations[k][i];
        }
        for (double& v : mean) v /= n;
        for (const TrajectoryRecord& r : records) {
            for (std::size_t i = 0; i < m; ++i) {
                const double d = r.expectations[k][i] - mean[i];
                ss[i] += d * d;
            }
        }
        avg.std_error[k].assign(m, 0.0);
        if (records.size() > 1) {
            for (std::size_t i = 0; i < m; ++i) avg.std_error[k][i] = std::sqrt(ss[i] / (n - 1.0) / n);
        }
    }
    return avg;
}

std::vector<TrajectoryRecord> run_ensemble(const McwfEngine& engine, const StateVector& psi0,
                                           const TrajectoryOptions& opts, std::size_t n, std::uint64_t master_seed,
                                           unsigned threads, std::uint64_t first_index) {
    std::vector<TrajectoryRecord> out(n);
    parallel_for(n, threads, [&](std::size_t i) {
        out[i] = run_trajectory(engine, psi0, opts, master_seed, first_index + i);
    });
    return out;
}

}  // namespace usctraj
