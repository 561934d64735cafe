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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "usctraj/cli/experiment.hpp"
#include "usctraj/errors.hpp"
#include "usctraj/version.hpp"

namespace {

namespace cli = usctraj::cli;

struct Flags {
    std::string config;
    std::string out;
    unsigned threads = 0;
    bool check_truncation = false;
};

void add_flags(CLI::App& sub, Flags& f) {
    sub.add_option("--config", f.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub.add_option("--out", f.out, "Output directory (overrides [output] directory)");
    sub.add_option("--threads", f.threads, "Worker threads (0: USCTRAJ_THREADS or hardware concurrency)");
    sub.add_flag("--check-truncation", f.check_truncation, "Compare against a doubled Fock truncation");
}

void report(const std::vector<std::filesystem::path>& paths) {
    for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
}

int run(const std::string& command, const Flags& f) {
    cli::ExperimentConfig cfg = cli::load_config(f.config);
    if (!f.out.empty()) cfg.output.directory = f.out;
    const std::filesystem::path dir = cfg.output.directory;
    for (const std::string& w : cfg.system.warnings()) std::cerr << "warning: " << w << '\n';

    if (f.check_truncation) {
        const cli::TruncationReport t = cli::check_truncation(cfg);
        std::printf("truncation n_fock=%d vs %d: omega_c shift %.3g, max level shift %.3g\n", t.n_fock, 2 * t.n_fock,
                    t.omega_c_shift, t.max_level_shift);
        report({cli::write_truncation(cfg, t, dir)});
    }

    if (command == "spectrum") {
        const cli::SpectrumResult r = cli::compute_spectrum(cfg);
        report(cli::write_spectrum(cfg, r, dir));
    } else if (command == "trajectory") {
        const cli::TrajectoryResult r = cli::compute_trajectory(cfg, f.threads);
        std::printf("trajectory index %llu, %zu jumps\n", static_cast<unsigned long long>(r.record.index),
                    r.record.jumps.size());
        report(cli::write_trajectory(r, dir));
    } else if (command == "ensemble") {
        const cli::EnsembleResult r = cli::compute_ensemble(cfg, f.threads);
        if (r.first_jump) {
            std::printf("first-jump histogram: %llu trajectories, %llu counted\n",
                        static_cast<unsigned long long>(r.first_jump->trajectory_count),
                        static_cast<unsigned long long>(r.first_jump->qualifying_count));
        }
        if (r.conditional) {
            std::printf("conditional histogram: %llu triggers, %llu counted%s\n",
                        static_cast<unsigned long long>(r.conditional->triggered_count),
                        static_cast<unsigned long long>(r.conditional->qualifying_count),
                        r.conditional->empty() ? " (empty)" : "");
        }
        report(cli::write_ensemble(r, dir));
    } else {
        const cli::ComparisonResult r = cli::compute_comparison(cfg, f.threads);
        for (int k = 0; k < 3; ++k) {
            std::printf("%-7s max |mean - lme| %.3g (%.2f SE), LME exchange-band prominence %.3g\n",
                        usctraj::Observables::names()[k], r.max_deviation[k], r.max_z[k], r.band_prominence[k]);
        }
        report(cli::write_comparison(r, dir));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-trajectory simulator for two qubits ultrastrongly coupled to a cavity"};
    app.set_version_flag("--version", std::string(usctraj::version_string));
    app.require_subcommand(1);

    Flags flags;
    std::string command;
    for (const char* name : {"spectrum", "trajectory", "ensemble", "compare-lme"}) {
        const char* help = std::string(name) == "spectrum"     ? "Lowest levels of the full and effective models versus detuning"
                           : std::string(name) == "trajectory" ? "One quantum trajectory with expectation series and jump log"
                           : std::string(name) == "ensemble"   ? "Trajectory ensemble: averages and jump histograms"
                                                               : "Trajectory ensemble against the Lindblad master equation";
        CLI::App* sub = app.add_subcommand(name, help);
        add_flags(*sub, flags);
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return run(command, flags);
    } catch (const usctraj::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const usctraj::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
