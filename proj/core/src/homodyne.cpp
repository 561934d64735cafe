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

#include "usctraj/homodyne.hpp"

#include <cmath>

#include "usctraj/errors.hpp"
#include "usctraj/parallel.hpp"

namespace usctraj {

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t index) : rng_(seed, index | (1ULL << 63)) {}

HomodyneDrift parse_homodyne_drift(const std::string& s) {
    if (s == "as_printed") return HomodyneDrift::as_printed;
    if (s == "standard") return HomodyneDrift::standard;
    throw config_error("unknown homodyne drift '" + s + "' (expected standard or as_printed)");
}

std::string to_string(HomodyneDrift d) { return d == HomodyneDrift::standard ? "standard" : "as_printed"; }

HomodyneEngine::HomodyneEngine(const DissipativeSystem& sys, double dt, std::array<bool, 4> monitored,
                               HomodyneDrift drift)
    : base_(sys, dt), monitored_(monitored), drift_(drift) {
    const int dim = sys.hamiltonian.dimension();
    jump_decay_ = Eigen::MatrixXcd::Zero(dim, dim);
    for (const JumpChannel& c : base_.channels()) {
        if (!monitored_[static_cast<int>(c.label)] && c.rate != 0.0) {
            jump_decay_ += c.rate * (c.minus.entries() * c.plus.entries());
        }
    }
}

std::optional<JumpEvent> HomodyneEngine::step(StateVector& psi, double t_end, RngStream& rng, NoiseStream& noise,
                                              std::array<double, 4>* signal) const {
    const double dt = base_.dt();
    std::array<double, 4> dw{};
    for (int m = 0; m < channel_count; ++m) {
        if (monitored_[m]) dw[m] = noise.increment(dt);
    }

    bool any_detector = false;
    for (int m = 0; m < channel_count; ++m) any_detector = any_detector || !monitored_[m];
    if (any_detector) {
        const double total = dt * psi.dot(jump_decay_ * psi).real();
        if (total >= 1.0) throw timestep_too_large("photodetection probability per step exceeds 1");
        const double eps = rng.uniform();
        if (eps < total) {
            JumpEvent ev;
            ev.time = t_end;
            ev.probabilities = base_.channel_probabilities(psi);
            double sum = 0.0;
            for (int m = 0; m < channel_count; ++m) {
                if (monitored_[m]) ev.probabilities[m] = 0.0;
                sum += ev.probabilities[m];
            }
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
            for (const JumpChannel& c : base_.channels()) {
                if (static_cast<int>(c.label) != chosen) continue;
                StateVector next = c.plus.entries() * psi;
                const double n = next.norm();
                if (n < 1e-14) throw numerical_inconsistency("jump produced a state of norm " + std::to_string(n));
                psi = next / n;
                ev.channel = c.label;
            }
            return ev;
        }
    }

    StateVector next = base_.propagator() * psi;
    for (const JumpChannel& c : base_.channels()) {
        const int m = static_cast<int>(c.label);
        if (!monitored_[m] || c.rate == 0.0) continue;
        const StateVector sp = c.plus.entries() * psi;
        const cplx s_plus = psi.dot(sp);
        const double gamma = c.rate;
        if (drift_ == HomodyneDrift::standard) {
            const double x = 2.0 * s_plus.real();
            const double sg = std::sqrt(gamma);
            next += (0.5 * gamma * x * dt + sg * dw[m]) * sp;
            next -= (0.125 * gamma * x * x * dt + 0.5 * sg * x * dw[m]) * psi;
            if (signal) (*signal)[m] += sg * x * dt + dw[m];
        } else {
            const cplx diff = std::conj(s_plus) - s_plus;  // <S- - S+>
            next -= 0.5 * (gamma * gamma * diff * dt + gamma * dw[m]) * sp;
            if (signal) (*signal)[m] += std::sqrt(gamma) * 2.0 * s_plus.real() * dt + dw[m];
        }
    }
    const double n = next.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw integrator_instability("diffusive step produced a null state");
    psi = next / n;
    return std::nullopt;
}

double HomodyneEngine::step_change_bound(const Eigen::MatrixXcd& o) const {
    const double dt = base_.dt();
    const Eigen::MatrixXcd& h = base_.effective_hamiltonian().entries();
    const Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
    const Eigen::MatrixXcd comm = herm * o - o * herm;
    auto op_norm = [](const Eigen::MatrixXcd& m) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        return svd.singularValues()(0);
    };
    const double o_norm = op_norm(o);
    double bound = op_norm(comm) * dt;
    for (const JumpChannel& c : base_.channels()) {
        if (c.rate == 0.0) continue;
        const double s = op_norm(c.plus.entries());
        bound += 2.0 * o_norm * c.rate * s * s * dt;
        if (monitored_[static_cast<int>(c.label)]) {
            const double amp = drift_ == HomodyneDrift::standard ? std::sqrt(c.rate) : c.rate;
            bound += 4.0 * o_norm * amp * s * 6.0 * std::sqrt(dt);
        }
    }
    return bound;
}

TrajectoryRecord run_homodyne_trajectory(const HomodyneEngine& engine, const StateVector& psi0,
                                         const TrajectoryOptions& opts, std::uint64_t master_seed,
                                         std::uint64_t index) {
    const double dt = engine.dt();
    const long n_steps = std::lround(opts.t_final / dt);
    if (std::abs(n_steps * dt - opts.t_final) > 1e-9 * std::max(1.0, opts.t_final)) {
        throw config_error("t_final must be an integer multiple of dt");
    }
    long rec_every = 0;
    if (opts.record_interval > 0.0) {
        rec_every = std::lround(opts.record_interval / dt);
        if (rec_every <= 0 || std::abs(rec_every * dt - opts.record_interval) > 1e-9 * opts.record_interval) {
            throw config_error("record_interval must be an integer multiple of dt");
        }
    }
    const bool early_stop = opts.max_jumps >= 0 || opts.required_first_jump || opts.window_after_first_jump > 0.0;
    if (rec_every > 0 && early_stop) {
        throw config_error("early-stopping options cannot be combined with an expectation series");
    }
    if (psi0.size() != engine.base().effective_hamiltonian().dimension()) {
        throw dimension_mismatch("initial state size does not match the Hilbert space");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw config_error("initial state must be normalized");

    TrajectoryRecord rec;
    rec.seed = master_seed;
    rec.index = index;
    RngStream rng(master_seed, index);
    NoiseStream noise(master_seed, index);
    StateVector psi = psi0;
    std::array<double, 4> signal{};

    auto record = [&](double t) {
        const auto v = measure(engine.base().observables(), psi);
        rec.time_grid.push_back(t);
        for (int k = 0; k < 3; ++k) rec.expectations[k].push_back(v[k]);
    };
    if (rec_every > 0) record(0.0);

    double t = 0.0;
    for (long s = 1; s <= n_steps; ++s) {
        t = s * dt;
        if (auto jump = engine.step(psi, t, rng, noise, &signal)) {
            rec.jumps.push_back(*jump);
            const int n_jumps = static_cast<int>(rec.jumps.size());
            if (opts.max_jumps >= 0 && n_jumps >= opts.max_jumps) break;
            if (n_jumps == 1 && opts.required_first_jump && jump->channel != *opts.required_first_jump) break;
        }
        if (rec_every > 0 && s % rec_every == 0) {
            record(t);
            for (int m = 0; m < channel_count; ++m) {
                if (engine.monitored()[m]) rec.homodyne_current[m].push_back(signal[m] / opts.record_interval);
            }
            signal.fill(0.0);
        }
        if (opts.window_after_first_jump > 0.0 && !rec.jumps.empty() &&
            t - rec.jumps.front().time >= opts.window_after_first_jump) {
            break;
        }
    }
    rec.final_time = t;
    if (opts.keep_final_state) rec.final_state = psi;
    return rec;
}

std::vector<TrajectoryRecord> run_homodyne_ensemble(const HomodyneEngine& engine, const StateVector& psi0,
                                                    const TrajectoryOptions& opts, std::size_t n,
                                                    std::uint64_t master_seed, unsigned threads,
                                                    std::uint64_t first_index) {
    std::vector<TrajectoryRecord> out(n);
    parallel_for(n, threads, [&](std::size_t i) {
        out[i] = run_homodyne_trajectory(engine, psi0, opts, master_seed, first_index + i);
    });
    return out;
}

}  // namespace usctraj
