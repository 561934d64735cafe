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

#include "usctraj/hilbert.hpp"

#include <cmath>
#include <sstream>

#include "usctraj/errors.hpp"

namespace usctraj {

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

void require_same_layout(const BasisLayout& a, const BasisLayout& b) {
    if (!(a == b)) {
        throw dimension_mismatch("operator layouts differ: n_fock " + std::to_string(a.n_fock()) +
                                 " vs " + std::to_string(b.n_fock()));
    }
}

}  // namespace

BasisLayout::BasisLayout(int n_fock) : n_fock_(n_fock) {
    if (n_fock < 2) {
        throw invalid_truncation("n_fock must be at least 2, got " + std::to_string(n_fock));
    }
}

BasisLayout build_layout(int n_fock) { return BasisLayout(n_fock); }

int BasisLayout::index(int n, Qubit s1, Qubit s2) const {
    if (n < 0 || n >= n_fock_) {
        throw invalid_truncation("photon number " + std::to_string(n) + " outside truncation");
    }
    return 4 * n + 2 * static_cast<int>(s1) + static_cast<int>(s2);
}

BasisState BasisLayout::state(int idx) const {
    if (idx < 0 || idx >= dimension()) {
        throw dimension_mismatch("basis index " + std::to_string(idx) + " out of range");
    }
    return {idx / 4, static_cast<Qubit>((idx / 2) % 2), static_cast<Qubit>(idx % 2)};
}

std::string BasisLayout::label(int idx) const {
    const BasisState s = state(idx);
    std::ostringstream os;
    os << '|' << s.n << ',' << (s.q1 == Qubit::e ? 'e' : 'g') << ','
       << (s.q2 == Qubit::e ? 'e' : 'g') << '>';
    return os.str();
}

StateVector BasisLayout::ket(int n, Qubit s1, Qubit s2) const {
    StateVector v = StateVector::Zero(dimension());
    v(index(n, s1, s2)) = 1.0;
    return v;
}

OperatorMatrix::OperatorMatrix(BasisLayout layout, Eigen::MatrixXcd entries, bool hermitian)
    : layout_(layout), entries_(std::move(entries)), hermitian_(hermitian) {
    if (entries_.rows() != layout_.dimension() || entries_.cols() != layout_.dimension()) {
        throw dimension_mismatch("matrix is " + std::to_string(entries_.rows()) + "x" +
                                 std::to_string(entries_.cols()) + ", layout dimension is " +
                                 std::to_string(layout_.dimension()));
    }
    if (hermitian_) {
        const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
        if (hermiticity_defect() >= 1e-12 * scale) {
            throw non_hermitian("operator flagged Hermitian has defect " +
                                std::to_string(hermiticity_defect()));
        }
    }
}

OperatorMatrix OperatorMatrix::adjoint() const {
    return OperatorMatrix(layout_, entries_.adjoint(), hermitian_);
}

double OperatorMatrix::hermiticity_defect() const {
    if (entries_.size() == 0) return 0.0;
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

OperatorMatrix OperatorMatrix::operator+(const OperatorMatrix& rhs) const {
    require_same_layout(layout_, rhs.layout_);
    return OperatorMatrix(layout_, entries_ + rhs.entries_, hermitian_ && rhs.hermitian_);
}

OperatorMatrix OperatorMatrix::operator-(const OperatorMatrix& rhs) const {
    require_same_layout(layout_, rhs.layout_);
    return OperatorMatrix(layout_, entries_ - rhs.entries_, hermitian_ && rhs.hermitian_);
}

OperatorMatrix OperatorMatrix::operator*(const OperatorMatrix& rhs) const {
    require_same_layout(layout_, rhs.layout_);
    return OperatorMatrix(layout_, entries_ * rhs.entries_, false);
}

OperatorMatrix OperatorMatrix::operator*(cplx s) const {
    return OperatorMatrix(layout_, entries_ * s, hermitian_ && s.imag() == 0.0);
}

OperatorMatrix OperatorMatrix::operator*(double s) const {
    return OperatorMatrix(layout_, entries_ * s, hermitian_);
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    return a * b - b * a;
}

ElementaryOperators elementary_operators(const BasisLayout& layout) {
    const int nf = layout.n_fock();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nf, nf);
    for (int n = 1; n < nf; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXcd i_cav = Eigen::MatrixXcd::Identity(nf, nf);

    // Qubit basis {g, e}; e is the +1 eigenstate of sz.
    Eigen::Matrix2cd sz, sp, sm;
    sz << -1.0, 0.0, 0.0, 1.0;
    sp << 0.0, 0.0, 1.0, 0.0;
    sm << 0.0, 1.0, 0.0, 0.0;
    const Eigen::MatrixXcd sx = sp + sm;
    const Eigen::MatrixXcd i2 = Eigen::MatrixXcd::Identity(2, 2);

    auto cavity = [&](const Eigen::MatrixXcd& m) { return kron(m, kron(i2, i2)); };
    auto qubit1 = [&](const Eigen::MatrixXcd& m) { return kron(i_cav, kron(m, i2)); };
    auto qubit2 = [&](const Eigen::MatrixXcd& m) { return kron(i_cav, kron(i2, m)); };

    ElementaryOperators ops;
    ops.a = OperatorMatrix(layout, cavity(a), false);
    ops.a_dag = OperatorMatrix(layout, cavity(a.adjoint()), false);
    ops.sx1 = OperatorMatrix(layout, qubit1(sx), true);
    ops.sx2 = OperatorMatrix(layout, qubit2(sx), true);
    ops.sz1 = OperatorMatrix(layout, qubit1(sz), true);
    ops.sz2 = OperatorMatrix(layout, qubit2(sz), true);
    ops.sp1 = OperatorMatrix(layout, qubit1(sp), false);
    ops.sp2 = OperatorMatrix(layout, qubit2(sp), false);
    ops.sm1 = OperatorMatrix(layout, qubit1(sm), false);
    ops.sm2 = OperatorMatrix(layout, qubit2(sm), false);
    ops.identity = OperatorMatrix(layout, Eigen::MatrixXcd::Identity(layout.dimension(), layout.dimension()), true);
    return ops;
}

cplx expectation(const Eigen::MatrixXcd& m, const StateVector& psi) {
    if (m.rows() != psi.size() || m.cols() != psi.size()) {
        throw dimension_mismatch("state of size " + std::to_string(psi.size()) +
                                 " against operator of dimension " + std::to_string(m.rows()));
    }
    return psi.dot(m * psi);
}

cplx expectation(const OperatorMatrix& m, const StateVector& psi) {
    return expectation(m.entries(), psi);
}

}  // namespace usctraj
