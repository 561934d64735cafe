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

#include "usctraj/oracles.hpp"

#include <cmath>

namespace usctraj {

namespace {

using C = std::complex<double>;
constexpr C I1(0.0, 1.0);

// sin(z) / z * scale with the z -> 0 limit handled.
C sinc_ratio(C num, C z, double arg_scale, double t) {
    if (std::abs(z) < 1e-300) return num * arg_scale * t;
    return num / z * std::sin(z * arg_scale * t);
}

}  // namespace

SubspaceRates subspace_rates(const SystemParams& p, Omega2Mode mode) {
    const EffectiveCouplings ec = effective_couplings(p, mode);
    SubspaceRates r;
    r.omega2 = ec.omega2;
    r.omega3 = ec.omega3;
    r.kappa = p.kappa;
    r.gamma1 = p.gamma1;
    r.gamma2 = p.gamma2;
    r.gamma_c = p.gamma_c;
    r.qq_detuning = p.delta + 0.5 * (ec.chi1 - ec.chi2);
    return r;
}

C eta(const SubspaceRates& r) {
    const double k = r.kappa - r.big_gamma();
    return std::sqrt(C(16.0 * r.omega3 * r.omega3 - k * k, 0.0));
}

Eigen::Matrix2cd u_1p2a(double t, const SubspaceRates& r) {
    const C e = eta(r);
    const double k = r.kappa - r.big_gamma();
    const C cs = std::cos(e * t / 4.0);
    const C sk = sinc_ratio(C(k, 0.0), e, 0.25, t);
    const C s3 = sinc_ratio(4.0 * I1 * r.omega3, e, 0.25, t);
    const double damp = std::exp(-0.25 * (r.kappa + r.big_gamma()) * t);
    Eigen::Matrix2cd u;
    u << cs - sk, -s3, -s3, cs + sk;
    return damp * u;
}

std::pair<double, double> expectations_1p2a(double t, const SubspaceRates& r) {
    const Eigen::Matrix2cd u = u_1p2a(t, r);
    const double a = std::norm(u(0, 0));
    const double b = std::norm(u(1, 0));
    return {a / (a + b), b / (a + b)};
}

std::pair<double, double> expectations_1p2a_rational(double t, const SubspaceRates& r) {
    const double e = eta(r).real();
    const double q = (r.kappa - r.big_gamma()) / e;
    const double s4 = std::sin(e * t / 4.0);
    const double c4 = std::cos(e * t / 4.0);
    const double s2 = std::sin(e * t / 2.0);
    const double w = 4.0 * r.omega3 / e;
    const double den = 1.0 - q * s2 + 2.0 * q * q * s4 * s4;
    return {(c4 * c4 + q * q * s4 * s4 - q * s2) / den, w * w * s4 * s4 / den};
}

C zeta(const SubspaceRates& r, QqConvention conv) {
    const double scale = conv == QqConvention::consistent ? 4.0 : 1.0;
    const C q = 4.0 * r.omega2 - I1 * r.gamma_c;
    const C p = r.delta_gamma() + I1 * (scale * r.qq_detuning);
    return std::sqrt(q * q - p * p);
}

Eigen::Matrix2cd u_qq(double t, const SubspaceRates& r, QqConvention conv) {
    const double scale = conv == QqConvention::consistent ? 4.0 : 1.0;
    const C z = zeta(r, conv);
    const C cs = std::cos(z * t / 4.0);
    const C sd = sinc_ratio(r.delta_gamma() + I1 * (scale * r.qq_detuning), z, 0.25, t);
    const C so = sinc_ratio(I1 * (4.0 * r.omega2 - I1 * r.gamma_c), z, 0.25, t);
    const double damp = std::exp(-0.25 * r.big_gamma() * t);
    Eigen::Matrix2cd u;
    u << cs - sd, -so, -so, cs + sd;
    return damp * u;
}

namespace {

// 2 |zeta|^2 |alpha_j|^2 exp(Gamma t / 2) for alpha = U c.
double weighted_amplitude(double t, C z, C cj, C sj) {
    const double z2 = std::norm(z);
    const double x = z.real() * t / 2.0;
    const double y = z.imag() * t / 2.0;
    const C w = I1 * cj * std::conj(sj) * z;
    return (z2 * std::norm(cj) + std::norm(sj)) * std::cosh(y) + (z2 * std::norm(cj) - std::norm(sj)) * std::cos(x) +
           2.0 * w.real() * std::sin(x) + 2.0 * w.imag() * std::sinh(y);
}

}  // namespace

std::pair<double, double> qq_expectations(double t, const SubspaceRates& r, C c_eg, C c_ge) {
    const C p = 4.0 * r.qq_detuning - I1 * r.delta_gamma();
    const C q = 4.0 * r.omega2 - I1 * r.gamma_c;
    const C z = std::sqrt(p * p + q * q);
    if (std::abs(z) < 1e-12 * (std::abs(p) + std::abs(q) + 1e-300)) {
        const Eigen::Matrix2cd u = u_qq(t, r);
        const C a = u(0, 0) * c_eg + u(0, 1) * c_ge;
        const C b = u(1, 0) * c_eg + u(1, 1) * c_ge;
        const double n = std::norm(a) + std::norm(b);
        return {std::norm(a) / n, std::norm(b) / n};
    }
    const C s_eg = p * c_eg + q * c_ge;
    const C s_ge = q * c_eg - p * c_ge;
    const double a = weighted_amplitude(t, z, c_eg, s_eg);
    const double b = weighted_amplitude(t, z, c_ge, s_ge);
    return {a / (a + b), b / (a + b)};
}

double qq_survival(double t, const SubspaceRates& r, C c_eg, C c_ge) {
    const Eigen::Matrix2cd u = u_qq(t, r);
    const Eigen::Vector2cd v = u * Eigen::Vector2cd(c_eg, c_ge);
    return v.squaredNorm();
}

std::pair<double, double> qq_local_jump_rational(double t, const SubspaceRates& r) {
    const C z = zeta(r);
    const C q = C(r.delta_gamma(), 0.0) / z;
    const C s4 = std::sin(z * t / 4.0);
    const C c4 = std::cos(z * t / 4.0);
    const C s2 = std::sin(z * t / 2.0);
    const C w = 4.0 * r.omega2 / z;
    const C den = 1.0 + q * s2 + 2.0 * q * q * s4 * s4;
    return {(w * w * s4 * s4 / den).real(), ((c4 * c4 + q * q * s4 * s4 + q * s2) / den).real()};
}

std::pair<double, double> qq_local_jump_identical_collective(double t, const SubspaceRates& r) {
    const double e = std::exp(-0.5 * r.gamma_c * t);
    const double osc = e * std::cos(2.0 * r.omega2 * t) / (1.0 + e * e);
    return {0.5 - osc, 0.5 + osc};
}

std::pair<double, double> qq_expectations_after_local_jump(double t, const SubspaceRates& r) {
    const bool no_detuning = r.qq_detuning == 0.0;
    if (no_detuning && r.gamma_c == 0.0 && std::abs(zeta(r).imag()) < 1e-15 && std::abs(zeta(r)) > 0.0) {
        return qq_local_jump_rational(t, r);
    }
    if (no_detuning && r.delta_gamma() == 0.0 && r.gamma_c > 0.0) {
        return qq_local_jump_identical_collective(t, r);
    }
    return qq_expectations(t, r, C(0.0, 0.0), C(0.0, -1.0));
}

std::pair<double, double> qq_expectations_after_collective_jump(double t, const SubspaceRates& r) {
    const C a(0.0, -1.0 / std::sqrt(2.0));
    return qq_expectations(t, r, a, a);
}

}  // namespace usctraj
