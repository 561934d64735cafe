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

#include "usctraj/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "usctraj/errors.hpp"

namespace usctraj {

void SystemParams::validate() const {
    if (!(omega0 > 0.0)) throw config_error("omega0 must be positive");
    if (!(omega_c > 0.0)) throw config_error("omega_c must be positive");
    if (g < 0.0) throw config_error("g must be non-negative");
    const double rates[] = {kappa, gamma1, gamma2, gamma_c};
    for (double r : rates) {
        if (r < 0.0 || !std::isfinite(r)) throw config_error("dissipation rates must be finite and non-negative");
    }
    if (!std::isfinite(delta) || !std::isfinite(theta)) throw config_error("delta and theta must be finite");
}

std::vector<std::string> SystemParams::warnings() const {
    std::vector<std::string> out;
    const double det[] = {std::abs(omega_c - omega_q1()), std::abs(omega_c - omega_q2())};
    for (int i = 0; i < 2; ++i) {
        if (g > 0.3 * det[i]) {
            std::ostringstream os;
            os << "g = " << g << " exceeds 0.3 x |omega_c - omega_q" << (i + 1) << "| = " << 0.3 * det[i]
               << "; perturbative couplings may be inaccurate";
            out.push_back(os.str());
        }
    }
    return out;
}

Omega2Mode parse_omega2_mode(const std::string& s) {
    if (s == "auto" || s == "automatic") return Omega2Mode::automatic;
    if (s == "always") return Omega2Mode::always;
    if (s == "never") return Omega2Mode::never;
    throw config_error("unknown omega2 mode '" + s + "' (expected auto, always or never)");
}

std::string to_string(Omega2Mode m) {
    switch (m) {
        case Omega2Mode::automatic: return "auto";
        case Omega2Mode::always: return "always";
        case Omega2Mode::never: return "never";
    }
    return "auto";
}

HamiltonianKind parse_hamiltonian_kind(const std::string& s) {
    if (s == "full") return HamiltonianKind::full;
    if (s == "effective") return HamiltonianKind::effective;
    throw config_error("unknown hamiltonian '" + s + "' (expected full or effective)");
}

std::string to_string(HamiltonianKind k) { return k == HamiltonianKind::full ? "full" : "effective"; }

EffectiveCouplings effective_couplings(const SystemParams& p, Omega2Mode mode) {
    const double w = p.omega0;
    const double d = p.delta;
    if (std::abs(d) >= w) {
        throw singular_denominator("effective couplings need |delta| < omega0, got delta = " + std::to_string(d));
    }
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    const double g2c2 = p.g * p.g * c * c;

    EffectiveCouplings ec;
    ec.omega2_resonant = -4.0 * g2c2 / (3.0 * w);
    ec.omega3 = -8.0 * p.g * g2c2 * s * (3.0 * w * w + d * d) / ((w * w - d * d) * (9.0 * w * w - d * d));
    ec.chi1 = -2.0 * g2c2 * (w + d) / ((w - d) * (3.0 * w + d));
    ec.chi2 = -2.0 * g2c2 * (w - d) / ((w + d) * (3.0 * w - d));
    ec.zz = -p.g * p.g * s * s / (2.0 * w);

    // Diagonal dressing of |1,g,g> and |0,e,e>; the zz part is equal on both and drops out.
    const double e_1gg = -(ec.chi1 + ec.chi2) * 1.5;
    const double e_0ee = (ec.chi1 + ec.chi2) * 0.5;
    ec.shift_1gg = 0.5 * (e_1gg - e_0ee);
    ec.shift_0ee = -ec.shift_1gg;

    switch (mode) {
        case Omega2Mode::automatic: ec.omega2_active = std::abs(d) < std::abs(ec.omega2_resonant); break;
        case Omega2Mode::always: ec.omega2_active = true; break;
        case Omega2Mode::never: ec.omega2_active = false; break;
    }
    ec.omega2 = ec.omega2_active ? ec.omega2_resonant : 0.0;
    return ec;
}

OperatorMatrix full_hamiltonian(const SystemParams& p, const BasisLayout& layout) {
    const ElementaryOperators ops = elementary_operators(layout);
    const Eigen::MatrixXcd x = ops.a.entries() + ops.a_dag.entries();
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    Eigen::MatrixXcd h = p.omega_c * ops.a_dag.entries() * ops.a.entries();
    h += 0.5 * p.omega_q1() * ops.sz1.entries() + 0.5 * p.omega_q2() * ops.sz2.entries();
    const Eigen::MatrixXcd qubit = c * (ops.sx1.entries() + ops.sx2.entries()) + s * (ops.sz1.entries() + ops.sz2.entries());
    h += p.g * x * qubit;
    h = 0.5 * (h + h.adjoint()).eval();
    return OperatorMatrix(layout, std::move(h), true);
}

OperatorMatrix effective_hamiltonian(const SystemParams& p, const BasisLayout& layout, Omega2Mode mode) {
    const EffectiveCouplings ec = effective_couplings(p, mode);
    const ElementaryOperators ops = elementary_operators(layout);
    const int dim = layout.dimension();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
    const Eigen::MatrixXcd num = ops.a_dag.entries() * ops.a.entries();
    const Eigen::MatrixXcd szs = ops.sz1.entries() + ops.sz2.entries();

    Eigen::MatrixXcd h = p.omega_c * num;
    h += 0.5 * p.omega_q1() * ops.sz1.entries() + 0.5 * p.omega_q2() * ops.sz2.entries();
    h += (ec.chi1 * ops.sz1.entries() + ec.chi2 * ops.sz2.entries()) * (num + 0.5 * id);
    h += ec.zz * szs * szs;
    if (ec.omega2_active) {
        h += ec.omega2 * (ops.sm1.entries() * ops.sp2.entries() + ops.sp1.entries() * ops.sm2.entries());
    }
    const Eigen::MatrixXcd up = ops.a.entries() * ops.sp1.entries() * ops.sp2.entries();
    h += ec.omega3 * (up + up.adjoint());
    h = 0.5 * (h + h.adjoint()).eval();
    return OperatorMatrix(layout, std::move(h), true);
}

OperatorMatrix build_hamiltonian(const SystemParams& p, const BasisLayout& layout, HamiltonianKind kind,
                                 Omega2Mode mode) {
    return kind == HamiltonianKind::full ? full_hamiltonian(p, layout) : effective_hamiltonian(p, layout, mode);
}

double effective_resonance(const SystemParams& p) {
    const EffectiveCouplings ec = effective_couplings(p);
    return p.omega_q1() + p.omega_q2() - (ec.shift_1gg - ec.shift_0ee);
}

ResonancePair resonance_pair(const SystemParams& p, const BasisLayout& layout) {
    const OperatorMatrix h = full_hamiltonian(p, layout);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.entries());
    if (es.info() != Eigen::Success) throw numerical_inconsistency("eigensolver failed during calibration");
    const int i_1gg = layout.index(1, Qubit::g, Qubit::g);
    const int i_0ee = layout.index(0, Qubit::e, Qubit::e);
    const Eigen::MatrixXcd& v = es.eigenvectors();
    int best = -1;
    int second = -1;
    double w_best = -1.0;
    double w_second = -1.0;
    for (int k = 0; k < v.cols(); ++k) {
        const double w = std::norm(v(i_1gg, k)) + std::norm(v(i_0ee, k));
        if (w > w_best) {
            second = best;
            w_second = w_best;
            best = k;
            w_best = w;
        } else if (w > w_second) {
            second = k;
            w_second = w;
        }
    }
    ResonancePair rp;
    rp.lower = std::min(best, second);
    rp.upper = std::max(best, second);
    rp.gap = es.eigenvalues()(rp.upper) - es.eigenvalues()(rp.lower);
    return rp;
}

SystemParams calibrate_resonance(const SystemParams& p, const BasisLayout& layout, const CalibrationOptions& opts) {
    p.validate();
    SystemParams q = p;
    if (p.g == 0.0) {
        q.omega_c = p.omega_q1() + p.omega_q2();
        return q;
    }
    auto gap_at = [&](double wc) {
        q.omega_c = wc;
        return resonance_pair(q, layout).gap;
    };

    const double lo = p.omega_c - opts.window;
    const double step = 2.0 * opts.window / (opts.coarse_points - 1);
    int k_min = 0;
    double g_min = gap_at(lo);
    for (int k = 1; k < opts.coarse_points; ++k) {
        const double gk = gap_at(lo + k * step);
        if (gk < g_min) {
            g_min = gk;
            k_min = k;
        }
    }
    if (k_min == 0 || k_min == opts.coarse_points - 1) {
        throw calibration_failure("no anticrossing of |1,g,g> and |0,e,e> within omega_c = " +
                                  std::to_string(p.omega_c) + " +/- " + std::to_string(opts.window));
    }

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo + (k_min - 1) * step;
    double b = lo + (k_min + 1) * step;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = gap_at(x1);
    double f2 = gap_at(x2);
    while (b - a > opts.tolerance) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = gap_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = gap_at(x2);
        }
    }
    q.omega_c = 0.5 * (a + b);
    return q;
}

SystemParams calibrate_resonance(const SystemParams& p, const BasisLayout& layout, HamiltonianKind kind,
                                 const CalibrationOptions& opts) {
    if (kind == HamiltonianKind::full) return calibrate_resonance(p, layout, opts);
    p.validate();
    SystemParams q = p;
    q.omega_c = effective_resonance(p);
    return q;
}

}  // namespace usctraj
