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

#include "usctraj/lme.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "usctraj/errors.hpp"

namespace usctraj {

DensityMatrix::DensityMatrix(BasisLayout layout, Eigen::MatrixXcd entries)
    : layout_(layout), entries_(std::move(entries)) {
    if (entries_.rows() != layout_.dimension() || entries_.cols() != layout_.dimension()) {
        throw dimension_mismatch("density matrix does not match the layout dimension");
    }
}

DensityMatrix DensityMatrix::pure(const BasisLayout& layout, const StateVector& psi) {
    if (psi.size() != layout.dimension()) throw dimension_mismatch("state does not match the layout dimension");
    const StateVector u = psi / psi.norm();
    return DensityMatrix(layout, u * u.adjoint());
}

double DensityMatrix::hermiticity_defect() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    const Eigen::MatrixXcd herm = 0.5 * (entries_ + entries_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

void DensityMatrix::validate() const {
    if (hermiticity_defect() > 1e-10) throw numerical_inconsistency("density matrix is not Hermitian");
    if (std::abs(trace() - 1.0) > 1e-8) throw numerical_inconsistency("density matrix trace differs from 1");
    if (min_eigenvalue() < -1e-8) throw numerical_inconsistency("density matrix has a negative eigenvalue");
}

Eigen::MatrixXcd lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& h,
                              const std::vector<JumpChannel>& channels) {
    if (rho.layout().dimension() != h.dimension()) throw dimension_mismatch("rho and H dimensions differ");
    const Eigen::MatrixXcd& r = rho.entries();
    const cplx mi(0.0, -1.0);
    Eigen::MatrixXcd out = mi * (h.entries() * r - r * h.entries());
    for (const JumpChannel& c : channels) {
        if (c.plus.dimension() != h.dimension()) throw dimension_mismatch("channel and H dimensions differ");
        if (c.rate == 0.0) continue;
        const Eigen::MatrixXcd& s = c.plus.entries();
        const Eigen::MatrixXcd sds = c.minus.entries() * s;
        out += c.rate * (s * r * c.minus.entries() - 0.5 * (sds * r + r * sds));
    }
    return out;
}

namespace {

struct DressedDissipator {
    std::vector<Eigen::MatrixXcd> ops;  // sqrt(gamma) L in the eigenbasis of H
    Eigen::MatrixXcd anti;              // sum gamma L^dagger L / 2

    Eigen::MatrixXcd operator()(const Eigen::MatrixXcd& r) const {
        Eigen::MatrixXcd out = -(anti * r + r * anti);
        for (const Eigen::MatrixXcd& l : ops) out.noalias() += l * r * l.adjoint();
        return out;
    }
};

}  // namespace

LmeSeries evolve_lme(const DensityMatrix& rho0, const OperatorMatrix& h, const std::vector<JumpChannel>& channels,
                     const LmeOptions& opts) {
    if (!h.hermitian()) throw non_hermitian("evolve_lme requires a Hermitian Hamiltonian");
    if (rho0.layout().dimension() != h.dimension()) throw dimension_mismatch("rho0 and H dimensions differ");
    if (!(opts.dt > 0.0)) throw config_error("dt must be positive");
    const long n_steps = std::lround(opts.t_final / opts.dt);
    const long rec_every = std::lround(opts.record_interval / opts.dt);
    if (std::abs(n_steps * opts.dt - opts.t_final) > 1e-9 * std::max(1.0, opts.t_final) || rec_every <= 0 ||
        std::abs(rec_every * opts.dt - opts.record_interval) > 1e-9 * opts.record_interval) {
        throw config_error("t_final and record_interval must be integer multiples of dt");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.entries());
    if (es.info() != Eigen::Success) throw numerical_inconsistency("Hermitian eigensolver did not converge");
    const Eigen::MatrixXcd& v = es.eigenvectors();
    const Eigen::VectorXd& e = es.eigenvalues();
    const int dim = h.dimension();

    DressedDissipator diss;
    diss.anti = Eigen::MatrixXcd::Zero(dim, dim);
    for (const JumpChannel& c : channels) {
        if (c.rate == 0.0) continue;
        const Eigen::MatrixXcd l = v.adjoint() * c.plus.entries() * v;
        diss.ops.push_back(std::sqrt(c.rate) * l);
        diss.anti += 0.5 * c.rate * (l.adjoint() * l);
    }
    const Observables obs = make_observables(channels);
    std::array<Eigen::MatrixXcd, 3> obs_d;
    for (int k = 0; k < 3; ++k) obs_d[k] = v.adjoint() * obs.ops[k] * v;

    const double dt = opts.dt;
    Eigen::MatrixXcd w_full(dim, dim), w_half(dim, dim);
    for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
            const double de = e(j) - e(k);
            w_full(j, k) = std::polar(1.0, -de * dt);
            w_half(j, k) = std::polar(1.0, -de * 0.5 * dt);
        }
    }

    Eigen::MatrixXcd y = v.adjoint() * rho0.entries() * v;
    LmeSeries out;
    auto record = [&](double t) {
        out.time_grid.push_back(t);
        for (int k = 0; k < 3; ++k) out.expectations[k].push_back((obs_d[k] * y).trace().real());
        const double tr_err = std::abs(y.trace() - 1.0);
        const double herm = (y - y.adjoint()).cwiseAbs().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ev(0.5 * (y + y.adjoint()), Eigen::EigenvaluesOnly);
        const double lam = ev.eigenvalues()(0);
        out.max_trace_error = std::max(out.max_trace_error, tr_err);
        out.max_hermiticity_defect = std::max(out.max_hermiticity_defect, herm);
        out.min_eigenvalue = std::min(out.min_eigenvalue, lam);
        if (lam < -opts.positivity_tolerance) {
            throw integrator_instability("density matrix eigenvalue " + std::to_string(lam) + " at t = " +
                                         std::to_string(t));
        }
    };
    record(0.0);

    for (long s = 1; s <= n_steps; ++s) {
        const Eigen::MatrixXcd y_half = w_half.cwiseProduct(y);
        const Eigen::MatrixXcd a = diss(y);
        const Eigen::MatrixXcd b = diss(y_half + 0.5 * dt * w_half.cwiseProduct(a));
        const Eigen::MatrixXcd c = diss(y_half + 0.5 * dt * b);
        const Eigen::MatrixXcd d = diss(w_full.cwiseProduct(y) + dt * w_half.cwiseProduct(c));
        y = w_full.cwiseProduct(y) +
            (dt / 6.0) * (w_full.cwiseProduct(a) + 2.0 * w_half.cwiseProduct(b + c) + d);
        if (s % rec_every == 0) record(s * dt);
    }
    out.final_state = DensityMatrix(rho0.layout(), v * y * v.adjoint());
    return out;
}

}  // namespace usctraj
