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

#include "usctraj/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "usctraj/errors.hpp"

namespace usctraj {

namespace {

void check_series(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw dimension_mismatch("time and value series differ in length");
    if (t.size() < 4) throw config_error("series too short for spectral analysis");
}

std::vector<double> detrended(const std::vector<double>& t, const std::vector<double>& y, bool linear) {
    const auto n = static_cast<double>(t.size());
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= n;
    my /= n;
    double slope = 0.0;
    if (linear) {
        double sty = 0.0, stt = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            sty += (t[i] - mt) * (y[i] - my);
            stt += (t[i] - mt) * (t[i] - mt);
        }
        if (stt > 0.0) slope = sty / stt;
    }
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = y[i] - my - slope * (t[i] - mt);
    return out;
}

using Model = std::function<double(double, const Eigen::VectorXd&)>;

struct ResidualFunctor : Eigen::DenseFunctor<double> {
    ResidualFunctor(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& w, Model m,
                    int n_params)
        : Eigen::DenseFunctor<double>(n_params, static_cast<int>(t.size())), t(t), y(y), w(w), model(std::move(m)) {}

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        for (std::size_t i = 0; i < t.size(); ++i) {
            f(static_cast<Eigen::Index>(i)) = std::sqrt(w[i]) * (model(t[i], x) - y[i]);
        }
        return 0;
    }

    const std::vector<double>& t;
    const std::vector<double>& y;
    const std::vector<double>& w;
    Model model;
};

struct Scaled {
    std::vector<double> t;
    double span = 1.0;
};

Scaled rescale(const std::vector<double>& t) {
    Scaled s;
    s.span = std::max(t.back() - t.front(), t.back());
    if (!(s.span > 0.0)) s.span = 1.0;
    s.t.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) s.t[i] = t[i] / s.span;
    return s;
}

std::vector<double> unit_weights_if_empty(const std::vector<double>& w, std::size_t n) {
    if (w.empty()) return std::vector<double>(n, 1.0);
    if (w.size() != n) throw dimension_mismatch("weight vector length differs from the series");
    return w;
}

struct LmOutcome {
    Eigen::VectorXd x;
    double chi2 = 0.0;
    int status = 0;
};

LmOutcome run_lm(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& w,
                 const Model& model, Eigen::VectorXd x0) {
    ResidualFunctor f(t, y, w, model, static_cast<int>(x0.size()));
    Eigen::NumericalDiff<ResidualFunctor> nd(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor>> lm(nd);
    lm.setMaxfev(4000);
    const auto st = lm.minimize(x0);
    Eigen::VectorXd r(static_cast<Eigen::Index>(t.size()));
    f(x0, r);
    return {x0, r.squaredNorm(), static_cast<int>(st)};
}

double wrap_phase(double p) { return std::remainder(p, 2.0 * std::numbers::pi); }

// Linear least squares for c + a cos(wt) + b sin(wt) with weights.
Eigen::Vector3d linear_harmonic(const std::vector<double>& t, const std::vector<double>& y,
                                const std::vector<double>& w, double omega) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(t.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double s = std::sqrt(w[i]);
        const auto k = static_cast<Eigen::Index>(i);
        a(k, 0) = s;
        a(k, 1) = s * std::cos(omega * t[i]);
        a(k, 2) = s * std::sin(omega * t[i]);
        b(k) = s * y[i];
    }
    return a.colPivHouseholderQr().solve(b);
}

}  // namespace

std::vector<double> frequency_grid(double omega_lo, double omega_hi, std::size_t n) {
    if (!(omega_hi > omega_lo) || omega_lo < 0.0 || n < 2) throw config_error("invalid frequency grid");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = omega_lo + (omega_hi - omega_lo) * i / (n - 1);
    return g;
}

std::vector<double> periodogram(const std::vector<double>& t, const std::vector<double>& y,
                                const std::vector<double>& omegas, bool detrend_linear) {
    check_series(t, y);
    const std::vector<double> d = detrended(t, y, detrend_linear);
    const double t0 = t.front();
    const double span = t.back() - t.front();
    std::vector<double> h(t.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        h[i] = span > 0.0 ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (t[i] - t0) / span)) : 1.0;
        norm += h[i] * h[i];
    }
    std::vector<double> p(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        std::complex<double> s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) s += h[i] * d[i] * std::polar(1.0, -omegas[k] * (t[i] - t0));
        p[k] = std::norm(s) / norm;
    }
    return p;
}

double peak_frequency(const std::vector<double>& t, const std::vector<double>& y, double omega_lo, double omega_hi,
                      std::size_t n) {
    const std::vector<double> grid = frequency_grid(omega_lo, omega_hi, n);
    const std::vector<double> p = periodogram(t, y, grid);
    return grid[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
}

double band_prominence(const std::vector<double>& t, const std::vector<double>& y, double omega, double rel,
                       bool detrend_linear) {
    if (!(omega > 0.0) || !(rel > 0.0) || rel >= 0.5) {
        throw config_error("band prominence needs positive frequency and a relative width below 1/2");
    }
    const std::vector<double> grid = frequency_grid(omega / 4.0, 4.0 * omega, 3000);
    const std::vector<double> p = periodogram(t, y, grid, detrend_linear);
    double peak = 0.0, flank = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (std::abs(grid[k] - omega) <= rel * omega) {
            peak = std::max(peak, p[k]);
        } else if (grid[k] <= omega / 2.0 || grid[k] >= 2.0 * omega) {
            flank = std::max(flank, p[k]);
        }
    }
    if (flank <= 0.0) return peak > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return peak / flank;
}

FitResult fit_damped_oscillation(const std::vector<double>& t_in, const std::vector<double>& y,
                                 const std::vector<double>& w_in, double omega_lo, double omega_hi) {
    check_series(t_in, y);
    const std::vector<double> w = unit_weights_if_empty(w_in, t_in.size());
    const Scaled s = rescale(t_in);

    // Envelope from a weighted log-linear fit of positive samples.
    double sw = 0, st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] <= 0.0) continue;
        const double l = std::log(y[i]), ww = std::max(y[i], 1e-300);
        sw += ww;
        st += ww * s.t[i];
        sl += ww * l;
        stt += ww * s.t[i] * s.t[i];
        stl += ww * s.t[i] * l;
    }
    const double den = sw * stt - st * st;
    double lambda = den != 0.0 ? -(sw * stl - st * sl) / den : 0.0;
    double amp = den != 0.0 ? std::exp((sl + lambda * st) / sw) : 1.0;
    if (!std::isfinite(lambda) || !std::isfinite(amp)) {
        lambda = 0.0;
        amp = 1.0;
    }

    std::vector<double> ratio(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ratio[i] = y[i] / (amp * std::exp(-lambda * s.t[i])) - 1.0;
    const double w0 = peak_frequency(s.t, ratio, omega_lo * s.span, omega_hi * s.span);
    const Eigen::Vector3d lin = linear_harmonic(s.t, ratio, std::vector<double>(y.size(), 1.0), w0);
    const double b0 = std::hypot(lin(1), lin(2));
    const double phi0 = std::atan2(-lin(2), lin(1));

    const Model m = [](double t, const Eigen::VectorXd& x) {
        return x(0) * std::exp(-x(1) * t) * (1.0 + x(2) * std::cos(x(3) * t + x(4)));
    };
    Eigen::VectorXd x0(5);
    x0 << amp * (1.0 + lin(0)), lambda, b0 / (1.0 + lin(0)), w0, phi0;
    const LmOutcome r = run_lm(s.t, y, w, m, x0);

    FitResult out;
    out.params = {r.x(0), r.x(1) / s.span, std::abs(r.x(2)), std::abs(r.x(3)) / s.span,
                  wrap_phase(r.x(2) < 0 ? r.x(4) + std::numbers::pi : r.x(4))};
    out.amplitude = out.params[2];
    out.decay = out.params[1];
    out.omega = out.params[3];
    out.chi2 = r.chi2;
    out.dof = y.size() > 5 ? y.size() - 5 : 0;
    out.status = r.status;
    return out;
}

FitResult fit_sinusoid(const std::vector<double>& t_in, const std::vector<double>& y, const std::vector<double>& w_in,
                       double omega_lo, double omega_hi) {
    check_series(t_in, y);
    const std::vector<double> w = unit_weights_if_empty(w_in, t_in.size());
    const Scaled s = rescale(t_in);
    const double w0 = peak_frequency(s.t, y, omega_lo * s.span, omega_hi * s.span);
    const Eigen::Vector3d lin = linear_harmonic(s.t, y, w, w0);

    const Model m = [](double t, const Eigen::VectorXd& x) { return x(0) + x(1) * std::cos(x(2) * t + x(3)); };
    Eigen::VectorXd x0(4);
    x0 << lin(0), std::hypot(lin(1), lin(2)), w0, std::atan2(-lin(2), lin(1));
    const LmOutcome r = run_lm(s.t, y, w, m, x0);

    FitResult out;
    out.params = {r.x(0), std::abs(r.x(1)), std::abs(r.x(2)) / s.span,
                  wrap_phase(r.x(1) < 0 ? r.x(3) + std::numbers::pi : r.x(3))};
    out.amplitude = out.params[1];
    out.omega = out.params[2];
    out.chi2 = r.chi2;
    out.dof = y.size() > 4 ? y.size() - 4 : 0;
    out.status = r.status;
    return out;
}

FitResult fit_sech_oscillation(const std::vector<double>& t_in, const std::vector<double>& y,
                               const std::vector<double>& w_in, double omega_lo, double omega_hi) {
    check_series(t_in, y);
    const std::vector<double> w = unit_weights_if_empty(w_in, t_in.size());
    const Scaled s = rescale(t_in);
    const double w0 = peak_frequency(s.t, y, omega_lo * s.span, omega_hi * s.span);

    const Model m = [](double t, const Eigen::VectorXd& x) {
        return x(0) - x(1) * std::cos(x(2) * t + x(3)) / std::cosh(x(4) * t);
    };
    LmOutcome best;
    best.chi2 = std::numeric_limits<double>::infinity();
    for (double l0 : {0.3, 1.0, 3.0, 10.0}) {
        std::vector<double> damped(y.size());
        const Eigen::Vector3d lin0 = linear_harmonic(s.t, y, w, w0);
        for (std::size_t i = 0; i < y.size(); ++i) damped[i] = (y[i] - lin0(0)) * std::cosh(l0 * s.t[i]);
        const Eigen::Vector3d lin = linear_harmonic(s.t, damped, w, w0);
        Eigen::VectorXd x0(5);
        x0 << lin0(0), -std::hypot(lin(1), lin(2)), w0, std::atan2(-lin(2), lin(1)), l0;
        LmOutcome r = run_lm(s.t, y, w, m, x0);
        if (std::isfinite(r.chi2) && r.chi2 < best.chi2) best = r;
    }
    if (!std::isfinite(best.chi2)) throw numerical_inconsistency("damped oscillation fit did not converge");

    FitResult out;
    const Eigen::VectorXd& x = best.x;
    out.params = {x(0), std::abs(x(1)), std::abs(x(2)) / s.span,
                  wrap_phase(x(1) < 0 ? x(3) + std::numbers::pi : x(3)), std::abs(x(4)) / s.span};
    out.amplitude = out.params[1];
    out.omega = out.params[2];
    out.decay = out.params[4];
    out.chi2 = best.chi2;
    out.dof = y.size() > 5 ? y.size() - 5 : 0;
    out.status = best.status;
    return out;
}

double chi2_homogeneity_pvalue(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    if (a.size() != b.size()) throw dimension_mismatch("count vectors differ in length");
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) throw config_error("chi-squared test needs nonempty samples");
    double stat = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double tot = static_cast<double>(a[i] + b[i]);
        if (tot == 0.0) continue;
        const double ea = tot * na / (na + nb), eb = tot * nb / (na + nb);
        stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
        ++used;
    }
    if (used < 2) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(used - 1), stat));
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.18) {
        const double pi = std::numbers::pi;
        double s = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double j = 2.0 * k - 1.0;
            s += std::exp(-j * j * pi * pi / (8.0 * x * x));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / x * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_exponential_pvalue(std::vector<double> samples, double rate) {
    if (samples.empty()) throw config_error("KS test needs at least one sample");
    if (!(rate > 0.0)) throw config_error("exponential rate must be positive");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = 1.0 - std::exp(-rate * std::max(samples[i], 0.0));
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double sn = std::sqrt(n);
    return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace usctraj
