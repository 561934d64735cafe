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

#include "usctraj/dressed.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "usctraj/errors.hpp"

namespace usctraj {

Eigen::MatrixXcd DressedBasis::to_dressed(const Eigen::MatrixXcd& m) const {
    return eigenvectors.adjoint() * m * eigenvectors;
}

Eigen::MatrixXcd DressedBasis::from_dressed(const Eigen::MatrixXcd& m) const {
    return eigenvectors * m * eigenvectors.adjoint();
}

DressedBasis diagonalize(const OperatorMatrix& h, double degeneracy_tolerance) {
    if (!h.hermitian()) throw non_hermitian("diagonalize requires a Hermitian operator");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.entries());
    if (es.info() != Eigen::Success) throw numerical_inconsistency("Hermitian eigensolver did not converge");

    DressedBasis b;
    b.eigenvalues = es.eigenvalues();
    b.eigenvectors = es.eigenvectors();
    b.source_hamiltonian = h;
    b.degeneracy_tolerance = degeneracy_tolerance;

    for (Eigen::Index k = 0; k < b.eigenvectors.cols(); ++k) {
        auto col = b.eigenvectors.col(k);
        Eigen::Index i_max = 0;
        double a_max = -1.0;
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            const double a = std::abs(col(i));
            if (a > a_max * (1.0 + 1e-12)) {
                a_max = a;
                i_max = i;
            }
        }
        const cplx phase = std::conj(col(i_max)) / a_max;
        col *= phase;
        col(i_max) = cplx(col(i_max).real(), 0.0);
    }
    return b;
}

OperatorMatrix positive_frequency(const OperatorMatrix& s, const DressedBasis& basis) {
    if (!s.hermitian() && s.hermiticity_defect() > 1e-12 * std::max(1.0, s.entries().cwiseAbs().maxCoeff())) {
        throw non_hermitian("positive_frequency requires a Hermitian coupling operator");
    }
    if (s.dimension() != basis.dimension()) throw dimension_mismatch("operator and basis dimensions differ");
    Eigen::MatrixXcd sd = basis.to_dressed(s.entries());
    const Eigen::VectorXd& e = basis.eigenvalues;
    const double tol = basis.degeneracy_tolerance;
    for (Eigen::Index k = 0; k < sd.cols(); ++k) {
        for (Eigen::Index j = 0; j < sd.rows(); ++j) {
            if (!(e(k) > e(j) + tol)) sd(j, k) = 0.0;
        }
    }
    return OperatorMatrix(s.layout(), basis.from_dressed(sd), false);
}

std::string to_string(Channel c) {
    switch (c) {
        case Channel::cavity: return "cavity";
        case Channel::qubit1: return "qubit1";
        case Channel::qubit2: return "qubit2";
        case Channel::collective: return "collective";
    }
    return "cavity";
}

Channel parse_channel(const std::string& s) {
    for (Channel c : all_channels) {
        if (to_string(c) == s) return c;
    }
    throw config_error("unknown channel '" + s + "' (expected cavity, qubit1, qubit2 or collective)");
}

std::vector<JumpChannel> jump_channels(const SystemParams& p, const DressedBasis& basis) {
    const BasisLayout& layout = basis.layout();
    const ElementaryOperators ops = elementary_operators(layout);
    const OperatorMatrix x(layout, ops.a.entries() + ops.a_dag.entries(), true);
    const OperatorMatrix xp = positive_frequency(x, basis);
    const OperatorMatrix c1p = positive_frequency(ops.sx1, basis);
    const OperatorMatrix c2p = positive_frequency(ops.sx2, basis);
    const OperatorMatrix cc = c1p + c2p;

    std::vector<JumpChannel> out;
    out.push_back({Channel::cavity, p.kappa, xp, xp.adjoint()});
    out.push_back({Channel::qubit1, p.gamma1, c1p, c1p.adjoint()});
    out.push_back({Channel::qubit2, p.gamma2, c2p, c2p.adjoint()});
    out.push_back({Channel::collective, 0.5 * p.gamma_c, cc, cc.adjoint()});
    return out;
}

DissipativeSystem make_system(const SystemParams& p, const BasisLayout& layout, HamiltonianKind kind,
                              Omega2Mode mode) {
    p.validate();
    DissipativeSystem sys;
    sys.params = p;
    sys.kind = kind;
    sys.omega2_mode = mode;
    sys.hamiltonian = build_hamiltonian(p, layout, kind, mode);
    sys.basis = diagonalize(sys.hamiltonian);
    sys.channels = jump_channels(p, sys.basis);
    return sys;
}

bool is_initial_state_label(const std::string& label) {
    static const char* labels[] = {"1gg", "0ee", "0eg", "0ge", "chi_plus", "chi_minus", "dressed_gs"};
    for (const char* l : labels) {
        if (label == l) return true;
    }
    return false;
}

StateVector initial_state(const std::string& label, const DissipativeSystem& sys) {
    const BasisLayout& L = sys.layout();
    using Q = Qubit;
    if (label == "1gg") return L.ket(1, Q::g, Q::g);
    if (label == "0ee") return L.ket(0, Q::e, Q::e);
    if (label == "0eg") return L.ket(0, Q::e, Q::g);
    if (label == "0ge") return L.ket(0, Q::g, Q::e);
    const double r = 1.0 / std::sqrt(2.0);
    if (label == "chi_plus") return cplx(0.0, -r) * (L.ket(0, Q::g, Q::e) + L.ket(0, Q::e, Q::g));
    if (label == "chi_minus") return r * (L.ket(0, Q::g, Q::e) - L.ket(0, Q::e, Q::g));
    if (label == "dressed_gs") return sys.basis.ground_state();
    throw config_error("unknown initial state '" + label +
                       "' (expected 1gg, 0ee, 0eg, 0ge, chi_plus, chi_minus or dressed_gs)");
}

}  // namespace usctraj
