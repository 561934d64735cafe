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

#include <cstdint>
#include <vector>

namespace usctraj {

// Power of the mean-subtracted, Hann-windowed series at each angular frequency. Samples may be unevenly spaced.
std::vector<double> periodogram(const std::vector<double>& t, const std::vector<double>& y,
                                const std::vector<double>& omegas, bool detrend_linear = false);

std::vector<double> frequency_grid(double omega_lo, double omega_hi, std::size_t n);

double peak_frequency(const std::vector<double>& t, const std::vector<double>& y, double omega_lo, double omega_hi,
                      std::size_t n = 4000);

// Maximum power in [omega (1 - rel), omega (1 + rel)] over the maximum power in [omega/4, omega/2] and
// [2 omega, 4 omega]. Values well above 1 mark a spectral peak in the band.
double band_prominence(const std::vector<double>& t, const std::vector<double>& y, double omega, double rel = 0.1,
                       bool detrend_linear = true);

struct FitResult {
    std::vector<double> params;
    double omega = 0.0;
    double decay = 0.0;
    double amplitude = 0.0;
    double chi2 = 0.0;  // weighted residual sum of squares
    std::size_t dof = 0;
    int status = 0;
};

// y = A exp(-lambda t) (1 + B cos(omega t + phi)); params {A, lambda, B, omega, phi}.
FitResult fit_damped_oscillation(const std::vector<double>& t, const std::vector<double>& y,
                                 const std::vector<double>& w, double omega_lo, double omega_hi);

// y = c + A cos(omega t + phi); params {c, A, omega, phi}.
FitResult fit_sinusoid(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& w,
                       double omega_lo, double omega_hi);

// y = c - A cos(omega t + phi) / cosh(lambda t); params {c, A, omega, phi, lambda}.
FitResult fit_sech_oscillation(const std::vector<double>& t, const std::vector<double>& y,
                               const std::vector<double>& w, double omega_lo, double omega_hi);

// Chi-squared test that two count vectors come from the same distribution. Bins empty in both are skipped.
double chi2_homogeneity_pvalue(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

// One-sample Kolmogorov-Smirnov p-value against an exponential law with the given rate.
double ks_exponential_pvalue(std::vector<double> samples, double rate);

}  // namespace usctraj
