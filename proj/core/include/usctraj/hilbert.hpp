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
#include <string>

#include <Eigen/Dense>

namespace usctraj {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;

enum class Qubit : int { g = 0, e = 1 };

struct BasisState {
    int n = 0;
    Qubit q1 = Qubit::g;
    Qubit q2 = Qubit::g;
};

// Truncated cavity x qubit x qubit space. Index of |n, s1, s2> is 4n + 2 s1 + s2.
class BasisLayout {
public:
    BasisLayout() = default;
    explicit BasisLayout(int n_fock);

    int n_fock() const { return n_fock_; }
    static constexpr int qubit_count() { return 2; }
    int dimension() const { return 4 * n_fock_; }

    int index(int n, Qubit s1, Qubit s2) const;
    int index(const BasisState& s) const { return index(s.n, s.q1, s.q2); }
    BasisState state(int idx) const;
    std::string label(int idx) const;

    // Unit vector on a product state.
    StateVector ket(int n, Qubit s1, Qubit s2) const;

    bool operator==(const BasisLayout& other) const { return n_fock_ == other.n_fock_; }

private:
    int n_fock_ = 2;
};

BasisLayout build_layout(int n_fock);

class OperatorMatrix {
public:
    OperatorMatrix() = default;
    OperatorMatrix(BasisLayout layout, Eigen::MatrixXcd entries, bool hermitian);

    const BasisLayout& layout() const { return layout_; }
    const Eigen::MatrixXcd& entries() const { return entries_; }
    bool hermitian() const { return hermitian_; }
    int dimension() const { return layout_.dimension(); }

    cplx operator()(int row, int col) const { return entries_(row, col); }

    OperatorMatrix adjoint() const;
    // Largest entry of |M - M^dagger|.
    double hermiticity_defect() const;

    OperatorMatrix operator+(const OperatorMatrix& rhs) const;
    OperatorMatrix operator-(const OperatorMatrix& rhs) const;
    OperatorMatrix operator*(const OperatorMatrix& rhs) const;
    OperatorMatrix operator*(cplx s) const;
    OperatorMatrix operator*(double s) const;

private:
    BasisLayout layout_;
    Eigen::MatrixXcd entries_;
    bool hermitian_ = false;
};

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

struct ElementaryOperators {
    OperatorMatrix a, a_dag;
    OperatorMatrix sx1, sx2, sz1, sz2;
    OperatorMatrix sp1, sp2, sm1, sm2;
    OperatorMatrix identity;
};

ElementaryOperators elementary_operators(const BasisLayout& layout);

cplx expectation(const OperatorMatrix& m, const StateVector& psi);
cplx expectation(const Eigen::MatrixXcd& m, const StateVector& psi);

}  // namespace usctraj
