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

#include <doctest.h>

#include <cmath>
#include <random>

#include "usctraj/analysis.hpp"

using namespace usctraj;

namespace {

std::vector<double> grid(double t0, double dt, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = t0 + dt * i;
    return t;
}

}  // namespace

TEST_CASE("periodogram peaks at the signal frequency") {
    const auto t = grid(0.0, 5.0, 2000);
    std::mt19937_64 gen(2);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> y, smooth;
    for (double x : t) {
        y.push_back(0.3 + 0.2 * std::cos(0.02 * x + 0.4) + 1e-4 * x + noise(gen));
        smooth.push_back(std::exp(-3e-4 * x) + 0.2 * std::exp(-1e-3 * x));
    }
    CHECK(peak_frequency(t, y, 0.005, 0.1) == doctest::Approx(0.02).epsilon(0.002));
    CHECK(band_prominence(t, y, 0.02) > 100.0);
    CHECK(band_prominence(t, y, 0.05) < 10.0);
    CHECK(band_prominence(t, smooth, 0.02) < 1.0);
    const auto w = frequency_grid(1.0, 2.0, 11);
    CHECK(w.size() == 11);
    CHECK(w.front() == 1.0);
    CHECK(w.back() == 2.0);
}

TEST_CASE("damped oscillation fit recovers its parameters") {
    const auto t = grid(0.0, 100.0, 400);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> y, w;
    for (double x : t) {
        const double m = 800.0 * std::exp(-1e-4 * x) * (1.0 + 0.6 * std::cos(2e-3 * x + 0.3));
        y.push_back(m + std::sqrt(m) * noise(gen));
        w.push_back(1.0 / std::max(y.back(), 1.0));
    }
    const FitResult f = fit_damped_oscillation(t, y, w, 5e-4, 1e-2);
    CHECK(f.omega == doctest::Approx(2e-3).epsilon(0.01));
    CHECK(f.decay == doctest::Approx(1e-4).epsilon(0.05));
    CHECK(f.params[2] == doctest::Approx(0.6).epsilon(0.05));
    CHECK(f.chi2 / f.dof < 1.5);
}

TEST_CASE("sinusoid fit recovers its parameters") {
    const auto t = grid(7.85, 15.7, 128);
    std::mt19937_64 gen(4);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<double> y, w(t.size(), 1.0);
    for (double x : t) y.push_back(0.5 - 0.45 * std::cos(0.02 * x) + noise(gen));
    const FitResult f = fit_sinusoid(t, y, w, 0.005, 0.1);
    CHECK(f.omega == doctest::Approx(0.02).epsilon(0.005));
    CHECK(std::abs(f.amplitude) == doctest::Approx(0.45).epsilon(0.03));
    CHECK(f.params[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sech-damped oscillation fit recovers its decay") {
    const auto t = grid(20.0, 40.0, 200);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> y, w(t.size(), 1.0);
    for (double x : t) y.push_back(0.5 - 0.5 * std::cos(0.02 * x) / std::cosh(2.5e-4 * x) + noise(gen));
    const FitResult f = fit_sech_oscillation(t, y, w, 0.005, 0.1);
    CHECK(f.omega == doctest::Approx(0.02).epsilon(0.005));
    CHECK(f.decay == doctest::Approx(2.5e-4).epsilon(0.1));
}

TEST_CASE("homogeneity test separates equal and different distributions") {
    const std::vector<std::uint64_t> a = {100, 200, 300, 200, 100, 0};
    const std::vector<std::uint64_t> b = {105, 190, 310, 195, 104, 0};
    const std::vector<std::uint64_t> c = {200, 200, 200, 200, 200, 0};
    CHECK(chi2_homogeneity_pvalue(a, b) > 0.5);
    CHECK(chi2_homogeneity_pvalue(a, c) < 1e-6);
}

TEST_CASE("Kolmogorov distribution tail") {
    CHECK(kolmogorov_survival(0.0) == doctest::Approx(1.0));
    CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(kolmogorov_survival(1.17) == doctest::Approx(kolmogorov_survival(1.19)).epsilon(0.05));
    std::mt19937_64 gen(9);
    std::exponential_distribution<double> d(2e-3);
    std::vector<double> s(3000);
    for (double& x : s) x = d(gen);
    CHECK(ks_exponential_pvalue(s, 2e-3) > 0.01);
    CHECK(ks_exponential_pvalue(s, 2.4e-3) < 1e-3);
}
