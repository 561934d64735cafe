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

#include "usctraj/cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "usctraj/errors.hpp"
#include "usctraj/parallel.hpp"
#include "usctraj/version.hpp"

namespace usctraj::cli {

namespace pt = boost::property_tree;

Solver parse_solver(const std::string& s) {
    if (s == "mcwf") return Solver::mcwf;
    if (s == "homodyne") return Solver::homodyne;
    if (s == "mixed") return Solver::mixed;
    if (s == "lme") return Solver::lme;
    throw config_error("unknown solver '" + s + "' (expected mcwf, homodyne, mixed or lme)");
}

std::string to_string(Solver s) {
    switch (s) {
        case Solver::mcwf: return "mcwf";
        case Solver::homodyne: return "homodyne";
        case Solver::mixed: return "mixed";
        case Solver::lme: return "lme";
    }
    return "mcwf";
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"system",
         {"omega0", "delta", "omega_c", "omega_c_source", "g", "theta", "kappa", "gamma1", "gamma2", "gamma_c",
          "n_fock", "omega2"}},
        {"run",
         {"solver", "hamiltonian", "propagator", "homodyne_drift", "monitored", "t_final", "dt", "record_interval",
          "n_trajectories", "master_seed", "first_index", "initial_state", "observables", "max_jumps",
          "require_first_jump", "window_after_first_jump", "seed_scan_limit", "target_triggers", "batch_size"}},
        {"output",
         {"directory", "prefix", "first_jump_bin", "conditional_bin", "conditional_window", "trigger",
          "first_jump_channels", "conditional_channels", "normalization", "jump_log"}},
        {"spectrum", {"delta_min", "delta_max", "points", "levels"}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double real(const std::string& section, const std::string& key, double def) const {
        const auto v = raw(section, key);
        return v ? to_real(*v, section, key) : def;
    }

    long long integer(const std::string& section, const std::string& key, long long def) const {
        const auto v = raw(section, key);
        if (!v) return def;
        std::size_t pos = 0;
        long long out = 0;
        try {
            out = std::stoll(*v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != v->size()) bad(section, key, *v, "an integer");
        return out;
    }

    std::string text(const std::string& section, const std::string& key, const std::string& def) const {
        return raw(section, key).value_or(def);
    }

    bool boolean(const std::string& section, const std::string& key, bool def) const {
        const auto v = raw(section, key);
        if (!v) return def;
        if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
        if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
        bad(section, key, *v, "a boolean");
        return def;
    }

    static double to_real(const std::string& v, const std::string& section, const std::string& key) {
        std::size_t pos = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != v.size() || !std::isfinite(out)) bad(section, key, v, "a finite number");
        return out;
    }

    [[noreturn]] static void bad(const std::string& section, const std::string& key, const std::string& v,
                                 const char* what) {
        throw config_error("[" + section + "] " + key + " = '" + v + "' is not " + what);
    }

private:
    const pt::ptree& tree_;
};

ChannelMask parse_mask(const std::string& s) {
    ChannelMask m = {false, false, false, false};
    if (s == "none") return m;
    if (s == "all") return every_channel;
    for (const std::string& item : split_list(s)) m[static_cast<int>(parse_channel(item))] = true;
    return m;
}

std::string render_mask(const ChannelMask& m) {
    std::string out;
    for (Channel c : all_channels) {
        if (!m[static_cast<int>(c)]) continue;
        if (!out.empty()) out += ",";
        out += to_string(c);
    }
    return out.empty() ? "none" : out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

TrajectoryOptions trajectory_options(const RunConfig& run) {
    TrajectoryOptions o;
    o.t_final = run.t_final;
    o.record_interval = run.record_interval;
    o.max_jumps = run.max_jumps;
    o.required_first_jump = run.require_first_jump;
    o.window_after_first_jump = run.window_after_first_jump;
    o.keep_final_state = false;
    return o;
}

ChannelMask homodyne_channels(const RunConfig& run) {
    if (run.solver == Solver::homodyne) return every_channel;
    return run.monitored;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void write_header(std::ostream& out, const std::string& provenance_text) {
    std::istringstream in(provenance_text);
    for (std::string line; std::getline(in, line);) out << "# " << line << '\n';
}

}  // namespace

void ExperimentConfig::validate() const {
    system.validate();
    if (n_fock < 2) throw invalid_truncation("n_fock must be at least 2");
    if (!(run.dt > 0.0)) throw config_error("dt must be positive");
    if (!(run.t_final > 0.0)) throw config_error("t_final must be positive");
    if (run.record_interval < 0.0) throw config_error("record_interval must be non-negative");
    if (run.n_trajectories < 1) throw config_error("n_trajectories must be at least 1");
    if (!is_initial_state_label(run.initial_state)) {
        throw config_error("unknown initial_state '" + run.initial_state +
                           "' (expected 1gg, 0ee, 0eg, 0ge, chi_plus, chi_minus or dressed_gs)");
    }
    if (run.batch_size < 1) throw config_error("batch_size must be at least 1");
    if (output.first_jump_bin < 0.0 || output.conditional_bin < 0.0 || output.conditional_window < 0.0) {
        throw config_error("histogram bin widths and windows must be non-negative");
    }
    if (spectrum.points < 1) throw config_error("spectrum points must be at least 1");
    if (spectrum.levels < 2 || spectrum.levels > 4 * n_fock) {
        throw config_error("spectrum levels must lie between 2 and the Hilbert-space dimension");
    }
    if (spectrum.delta_max < spectrum.delta_min) throw config_error("spectrum delta_max is below delta_min");
}

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) {
            if (!body.empty() || body.data().empty()) throw config_error("unknown config section [" + section + "]");
            throw config_error("config key '" + section + "' must be inside a section");
        }
        for (const auto& kv : body) {
            if (!it->second.count(kv.first)) {
                throw config_error("unknown config key '" + kv.first + "' in [" + section + "]");
            }
        }
    }

    const Reader r(tree);
    ExperimentConfig c;
    SystemParams& p = c.system;
    p.omega0 = r.real("system", "omega0", p.omega0);
    p.delta = r.real("system", "delta", p.delta);
    const std::string wc = r.text("system", "omega_c", "auto");
    c.calibrate_omega_c = (wc == "auto");
    if (!c.calibrate_omega_c) p.omega_c = Reader::to_real(wc, "system", "omega_c");
    p.g = r.real("system", "g", p.g);
    p.theta = r.real("system", "theta", p.theta);
    p.kappa = r.real("system", "kappa", p.kappa);
    p.gamma1 = r.real("system", "gamma1", p.gamma1);
    p.gamma2 = r.real("system", "gamma2", p.gamma2);
    p.gamma_c = r.real("system", "gamma_c", p.gamma_c);
    c.n_fock = static_cast<int>(r.integer("system", "n_fock", c.n_fock));
    c.omega2_mode = parse_omega2_mode(r.text("system", "omega2", to_string(c.omega2_mode)));

    RunConfig& run = c.run;
    run.solver = parse_solver(r.text("run", "solver", to_string(run.solver)));
    run.hamiltonian = parse_hamiltonian_kind(r.text("run", "hamiltonian", to_string(run.hamiltonian)));
    run.propagator = parse_propagator(r.text("run", "propagator", to_string(run.propagator)));
    run.homodyne_drift = parse_homodyne_drift(r.text("run", "homodyne_drift", to_string(run.homodyne_drift)));
    run.monitored = parse_mask(r.text("run", "monitored", render_mask(run.monitored)));
    run.t_final = r.real("run", "t_final", run.t_final);
    run.dt = r.real("run", "dt", run.dt);
    run.record_interval = r.real("run", "record_interval", run.record_interval);
    const long long n_traj = r.integer("run", "n_trajectories", static_cast<long long>(run.n_trajectories));
    if (n_traj < 1) throw config_error("n_trajectories must be at least 1");
    run.n_trajectories = static_cast<std::size_t>(n_traj);
    run.master_seed = static_cast<std::uint64_t>(r.integer("run", "master_seed", 1));
    run.first_index = static_cast<std::uint64_t>(r.integer("run", "first_index", 0));
    run.initial_state = r.text("run", "initial_state", run.initial_state);
    if (const auto obs = r.raw("run", "observables")) {
        run.observables = {false, false, false};
        for (const std::string& name : split_list(*obs)) {
            const auto& names = Observables::names();
            const auto it = std::find(names.begin(), names.end(), name);
            if (it == names.end()) throw config_error("unknown observable '" + name + "'");
            run.observables[static_cast<std::size_t>(it - names.begin())] = true;
        }
    }
    run.max_jumps = static_cast<int>(r.integer("run", "max_jumps", run.max_jumps));
    const std::string req = r.text("run", "require_first_jump", "none");
    if (req != "none") run.require_first_jump = parse_channel(req);
    run.window_after_first_jump = r.real("run", "window_after_first_jump", run.window_after_first_jump);
    run.seed_scan_limit = static_cast<std::size_t>(
        std::max<long long>(1, r.integer("run", "seed_scan_limit", static_cast<long long>(run.seed_scan_limit))));
    run.target_triggers = static_cast<std::size_t>(std::max<long long>(0, r.integer("run", "target_triggers", 0)));
    const long long batch = r.integer("run", "batch_size", static_cast<long long>(run.batch_size));
    if (batch < 1) throw config_error("batch_size must be at least 1");
    run.batch_size = static_cast<std::size_t>(batch);

    OutputConfig& out = c.output;
    out.directory = r.text("output", "directory", out.directory);
    out.prefix = r.text("output", "prefix", out.prefix);
    out.first_jump_bin = r.real("output", "first_jump_bin", out.first_jump_bin);
    out.conditional_bin = r.real("output", "conditional_bin", out.conditional_bin);
    out.conditional_window = r.real("output", "conditional_window", out.conditional_window);
    out.trigger = parse_channel(r.text("output", "trigger", to_string(out.trigger)));
    out.first_jump_channels = parse_mask(r.text("output", "first_jump_channels", render_mask(out.first_jump_channels)));
    out.conditional_channels =
        parse_mask(r.text("output", "conditional_channels", render_mask(out.conditional_channels)));
    out.normalization = parse_ratio_mode(r.text("output", "normalization", to_string(out.normalization)));
    out.jump_log = r.boolean("output", "jump_log", out.jump_log);

    SpectrumConfig& sp = c.spectrum;
    sp.delta_min = r.real("spectrum", "delta_min", sp.delta_min);
    sp.delta_max = r.real("spectrum", "delta_max", sp.delta_max);
    sp.points = static_cast<int>(r.integer("spectrum", "points", sp.points));
    sp.levels = static_cast<int>(r.integer("spectrum", "levels", sp.levels));

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file '" + path.string() + "'");
    return parse_config(in);
}

std::string render_config(const ExperimentConfig& c) {
    std::ostringstream o;
    const SystemParams& p = c.system;
    o << "[system]\n"
      << "omega0 = " << fmt(p.omega0) << "\n"
      << "delta = " << fmt(p.delta) << "\n"
      << "omega_c = " << (c.calibrate_omega_c ? std::string("auto") : fmt(p.omega_c)) << "\n"
      << "g = " << fmt(p.g) << "\n"
      << "theta = " << fmt(p.theta) << "\n"
      << "kappa = " << fmt(p.kappa) << "\n"
      << "gamma1 = " << fmt(p.gamma1) << "\n"
      << "gamma2 = " << fmt(p.gamma2) << "\n"
      << "gamma_c = " << fmt(p.gamma_c) << "\n"
      << "n_fock = " << c.n_fock << "\n"
      << "omega2 = " << to_string(c.omega2_mode) << "\n";
    const RunConfig& r = c.run;
    std::string obs;
    for (int k = 0; k < 3; ++k) {
        if (!r.observables[k]) continue;
        if (!obs.empty()) obs += ",";
        obs += Observables::names()[k];
    }
    o << "\n[run]\n"
      << "solver = " << to_string(r.solver) << "\n"
      << "hamiltonian = " << to_string(r.hamiltonian) << "\n"
      << "propagator = " << to_string(r.propagator) << "\n"
      << "homodyne_drift = " << to_string(r.homodyne_drift) << "\n"
      << "monitored = " << render_mask(r.monitored) << "\n"
      << "t_final = " << fmt(r.t_final) << "\n"
      << "dt = " << fmt(r.dt) << "\n"
      << "record_interval = " << fmt(r.record_interval) << "\n"
      << "n_trajectories = " << r.n_trajectories << "\n"
      << "master_seed = " << r.master_seed << "\n"
      << "first_index = " << r.first_index << "\n"
      << "initial_state = " << r.initial_state << "\n"
      << "observables = " << obs << "\n"
      << "max_jumps = " << r.max_jumps << "\n"
      << "require_first_jump = " << (r.require_first_jump ? to_string(*r.require_first_jump) : "none") << "\n"
      << "window_after_first_jump = " << fmt(r.window_after_first_jump) << "\n"
      << "seed_scan_limit = " << r.seed_scan_limit << "\n"
      << "target_triggers = " << r.target_triggers << "\n"
      << "batch_size = " << r.batch_size << "\n";
    const OutputConfig& out = c.output;
    o << "\n[output]\n"
      << "directory = " << out.directory << "\n"
      << "prefix = " << out.prefix << "\n"
      << "first_jump_bin = " << fmt(out.first_jump_bin) << "\n"
      << "conditional_bin = " << fmt(out.conditional_bin) << "\n"
      << "conditional_window = " << fmt(out.conditional_window) << "\n"
      << "trigger = " << to_string(out.trigger) << "\n"
      << "first_jump_channels = " << render_mask(out.first_jump_channels) << "\n"
      << "conditional_channels = " << render_mask(out.conditional_channels) << "\n"
      << "normalization = " << to_string(out.normalization) << "\n"
      << "jump_log = " << (out.jump_log ? "true" : "false") << "\n";
    const SpectrumConfig& sp = c.spectrum;
    o << "\n[spectrum]\n"
      << "delta_min = " << fmt(sp.delta_min) << "\n"
      << "delta_max = " << fmt(sp.delta_max) << "\n"
      << "points = " << sp.points << "\n"
      << "levels = " << sp.levels << "\n";
    return o.str();
}

PreparedSystem prepare(const ExperimentConfig& cfg) {
    cfg.validate();
    const BasisLayout layout = build_layout(cfg.n_fock);
    ExperimentConfig resolved = cfg;
    if (cfg.calibrate_omega_c) {
        resolved.system = calibrate_resonance(cfg.system, layout, cfg.run.hamiltonian, CalibrationOptions{});
        resolved.calibrate_omega_c = false;
    }
    DissipativeSystem sys = make_system(resolved.system, layout, cfg.run.hamiltonian, cfg.omega2_mode);
    StateVector psi0 = initial_state(cfg.run.initial_state, sys);
    return {std::move(resolved), std::move(sys), std::move(psi0)};
}

std::string provenance(const ExperimentConfig& resolved, const std::string& command) {
    return std::string(version_string) + "\ncommand = " + command + "\n" + render_config(resolved);
}

SpectrumResult compute_spectrum(const ExperimentConfig& cfg) {
    cfg.validate();
    const BasisLayout layout = build_layout(cfg.n_fock);
    const SpectrumConfig& sp = cfg.spectrum;
    SpectrumResult out;
    for (int i = 0; i < sp.points; ++i) {
        SystemParams p = cfg.system;
        p.delta = sp.points == 1 ? sp.delta_min
                                 : sp.delta_min + (sp.delta_max - sp.delta_min) * i / (sp.points - 1.0);
        if (cfg.calibrate_omega_c) p = calibrate_resonance(p, layout, HamiltonianKind::full, CalibrationOptions{});
        const DressedBasis full = diagonalize(full_hamiltonian(p, layout));
        const DressedBasis eff = diagonalize(effective_hamiltonian(p, layout, cfg.omega2_mode));
        std::vector<double> lf, le;
        for (int k = 1; k <= sp.levels; ++k) {
            lf.push_back(full.eigenvalues(k) - full.eigenvalues(0));
            le.push_back(eff.eigenvalues(k) - eff.eigenvalues(0));
        }
        out.delta.push_back(p.delta);
        out.omega_c_full.push_back(p.omega_c);
        out.omega_c_effective.push_back(effective_resonance(p));
        out.doublet_gap.push_back(full.eigenvalues(2) - full.eigenvalues(1));
        out.omega2_magnitude.push_back(std::abs(effective_couplings(p, cfg.omega2_mode).omega2));
        out.full_levels.push_back(std::move(lf));
        out.effective_levels.push_back(std::move(le));
    }
    return out;
}

TrajectoryResult compute_trajectory(const ExperimentConfig& cfg, unsigned threads) {
    if (cfg.run.solver == Solver::lme) throw config_error("the trajectory command needs a stochastic solver");
    TrajectoryResult out{prepare(cfg), {}, 0};
    const PreparedSystem& ps = out.prepared;
    const RunConfig& run = cfg.run;
    const bool diffusive = run.solver != Solver::mcwf;
    const McwfEngine mc(ps.system, run.dt, run.propagator);
    std::optional<HomodyneEngine> hd;
    if (diffusive) hd.emplace(ps.system, run.dt, homodyne_channels(run), run.homodyne_drift);

    auto simulate = [&](const TrajectoryOptions& o, std::uint64_t index) {
        return diffusive ? run_homodyne_trajectory(*hd, ps.initial, o, run.master_seed, index)
                         : run_trajectory(mc, ps.initial, o, run.master_seed, index);
    };

    std::uint64_t index = run.first_index;
    if (run.require_first_jump) {
        TrajectoryOptions scan;
        scan.t_final = run.t_final;
        scan.max_jumps = 1;
        scan.keep_final_state = false;
        const unsigned n_threads = resolve_thread_count(threads);
        const std::size_t chunk = std::max<std::size_t>(1, 4 * n_threads);
        std::optional<std::uint64_t> found;
        for (std::size_t start = 0; start < run.seed_scan_limit && !found; start += chunk) {
            const std::size_t n = std::min(chunk, run.seed_scan_limit - start);
            std::vector<int> hit(n, 0);
            parallel_for(n, n_threads, [&](std::size_t i) {
                const TrajectoryRecord r = simulate(scan, run.first_index + start + i);
                hit[i] = !r.jumps.empty() && r.jumps.front().channel == *run.require_first_jump;
            });
            for (std::size_t i = 0; i < n; ++i) {
                if (hit[i]) {
                    found = run.first_index + start + i;
                    break;
                }
            }
            out.scanned = start + n;
        }
        if (!found) {
            throw numerical_inconsistency("no trajectory with a first " + to_string(*run.require_first_jump) +
                                          " jump within seed_scan_limit indices");
        }
        index = *found;
        out.scanned = index - run.first_index + 1;
    }

    TrajectoryOptions o = trajectory_options(run);
    o.required_first_jump.reset();
    o.keep_final_state = true;
    if (o.record_interval > 0.0) {
        o.max_jumps = -1;
        o.window_after_first_jump = 0.0;
    }
    out.record = simulate(o, index);
    out.record.params = ps.config.system;
    return out;
}

EnsembleResult compute_ensemble(const ExperimentConfig& cfg, unsigned threads) {
    EnsembleResult out;
    out.prepared = prepare(cfg);
    const PreparedSystem& ps = out.prepared;
    const RunConfig& run = cfg.run;

    if (run.solver == Solver::lme) {
        if (!(run.record_interval > 0.0)) throw config_error("the lme solver needs record_interval > 0");
        LmeOptions lo;
        lo.t_final = run.t_final;
        lo.dt = run.dt;
        lo.record_interval = run.record_interval;
        out.lme = evolve_lme(DensityMatrix::pure(ps.system.layout(), ps.initial), ps.system.hamiltonian,
                             ps.system.channels, lo);
        return out;
    }

    const bool diffusive = run.solver != Solver::mcwf;
    const McwfEngine mc(ps.system, run.dt, run.propagator);
    std::optional<HomodyneEngine> hd;
    if (diffusive) hd.emplace(ps.system, run.dt, homodyne_channels(run), run.homodyne_drift);
    const TrajectoryOptions o = trajectory_options(run);
    const unsigned n_threads = resolve_thread_count(threads);

    const OutputConfig& oc = cfg.output;
    const double window = oc.conditional_window > 0.0       ? oc.conditional_window
                          : run.window_after_first_jump > 0 ? run.window_after_first_jump
                                                            : run.t_final;
    const std::size_t limit = run.n_trajectories;
    std::size_t done = 0;
    std::size_t triggers = 0;
    while (done < limit) {
        const std::size_t n = run.target_triggers > 0 ? std::min(run.batch_size, limit - done) : limit;
        const std::uint64_t first = run.first_index + done;
        std::vector<TrajectoryRecord> batch =
            diffusive ? run_homodyne_ensemble(*hd, ps.initial, o, n, run.master_seed, n_threads, first)
                      : run_ensemble(mc, ps.initial, o, n, run.master_seed, n_threads, first);
        for (TrajectoryRecord& r : batch) {
            r.params = ps.config.system;
            if (!r.jumps.empty() && r.jumps.front().channel == oc.trigger) ++triggers;
        }
        if (oc.first_jump_bin > 0.0) {
            JumpHistogram h = first_jump_histogram(batch, oc.first_jump_bin, oc.first_jump_channels, run.t_final);
            out.first_jump = out.first_jump ? merge(*out.first_jump, h) : h;
        }
        if (oc.conditional_bin > 0.0) {
            JumpHistogram h = conditional_second_jump_histogram(batch, oc.trigger, oc.conditional_bin,
                                                                oc.conditional_channels, window);
            out.conditional = out.conditional ? merge(*out.conditional, h) : h;
        }
        done += n;
        const bool keep = run.record_interval > 0.0 || oc.jump_log;
        if (keep) out.records.insert(out.records.end(), std::make_move_iterator(batch.begin()),
                                     std::make_move_iterator(batch.end()));
        if (run.target_triggers > 0 && triggers >= run.target_triggers) break;
    }
    if (run.record_interval > 0.0) out.average = ensemble_average(out.records);
    return out;
}

ComparisonResult compute_comparison(const ExperimentConfig& cfg, unsigned threads) {
    if (cfg.run.solver == Solver::lme) throw config_error("compare-lme needs a stochastic solver to compare against");
    if (!(cfg.run.record_interval > 0.0)) throw config_error("compare-lme needs record_interval > 0");
    ExperimentConfig c = cfg;
    c.run.max_jumps = -1;
    c.run.require_first_jump.reset();
    c.run.window_after_first_jump = 0.0;
    c.run.target_triggers = 0;
    c.output.first_jump_bin = 0.0;
    c.output.conditional_bin = 0.0;
    EnsembleResult ens = compute_ensemble(c, threads);

    ComparisonResult out;
    out.prepared = ens.prepared;
    out.trajectories = *ens.average;
    LmeOptions lo;
    lo.t_final = c.run.t_final;
    lo.dt = c.run.dt;
    lo.record_interval = c.run.record_interval;
    out.lme = evolve_lme(DensityMatrix::pure(out.prepared.system.layout(), out.prepared.initial),
                         out.prepared.system.hamiltonian, out.prepared.system.channels, lo);
    if (out.lme.time_grid.size() != out.trajectories.time_grid.size()) {
        throw numerical_inconsistency("LME and trajectory time grids differ");
    }
    const double w2 = 2.0 * std::abs(effective_couplings(out.prepared.config.system, c.omega2_mode).omega2_resonant);
    for (int k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < out.lme.time_grid.size(); ++i) {
            const double d = std::abs(out.trajectories.mean[k][i] - out.lme.expectations[k][i]);
            const double se = std::max(out.trajectories.std_error[k][i], standard_error_floor);
            out.max_deviation[k] = std::max(out.max_deviation[k], d);
            out.max_z[k] = std::max(out.max_z[k], d / se);
        }
    }
    if (w2 > 0.0) {
        const long every = std::max(1L, static_cast<long>(std::floor(std::numbers::pi / (8.0 * w2 * c.run.dt))));
        LmeOptions fine = lo;
        fine.record_interval = every * c.run.dt;
        fine.t_final = std::floor(c.run.t_final / fine.record_interval) * fine.record_interval;
        out.spectral_lme = evolve_lme(DensityMatrix::pure(out.prepared.system.layout(), out.prepared.initial),
                                      out.prepared.system.hamiltonian, out.prepared.system.channels, fine);
        if (out.spectral_lme.time_grid.size() >= 8) {
            for (int k = 0; k < 3; ++k) {
                out.band_prominence[k] =
                    band_prominence(out.spectral_lme.time_grid, out.spectral_lme.expectations[k], w2);
            }
        }
    }
    return out;
}

TruncationReport check_truncation(const ExperimentConfig& cfg) {
    ExperimentConfig wide = cfg;
    wide.n_fock = 2 * cfg.n_fock;
    wide.spectrum.levels = std::min(cfg.spectrum.levels, 4 * cfg.n_fock - 1);
    const PreparedSystem a = prepare(cfg);
    const PreparedSystem b = prepare(wide);
    TruncationReport r;
    r.n_fock = cfg.n_fock;
    r.omega_c_shift = std::abs(a.config.system.omega_c - b.config.system.omega_c);
    const auto& ea = a.system.basis.eigenvalues;
    const auto& eb = b.system.basis.eigenvalues;
    for (int k = 1; k <= wide.spectrum.levels; ++k) {
        r.max_level_shift = std::max(r.max_level_shift, std::abs((ea(k) - ea(0)) - (eb(k) - eb(0))));
    }
    return r;
}

void write_series(std::ostream& out, const std::vector<double>& t, const std::array<std::vector<double>, 3>& values,
                  const std::array<bool, 3>& columns) {
    out << "time";
    for (int k = 0; k < 3; ++k) {
        if (columns[k]) out << '\t' << Observables::names()[k];
    }
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << fmt_short(t[i]);
        for (int k = 0; k < 3; ++k) {
            if (columns[k]) out << '\t' << fmt_short(values[k][i]);
        }
        out << '\n';
    }
}

void write_jump_log(std::ostream& out, const std::vector<TrajectoryRecord>& records, const std::string& header) {
    nlohmann::ordered_json head;
    head["schema"] = "usctraj-jumps-1";
    head["header"] = header;
    out << head.dump() << '\n';
    for (const TrajectoryRecord& r : records) {
        nlohmann::ordered_json j;
        j["index"] = r.index;
        j["seed"] = r.seed;
        j["final_time"] = r.final_time;
        nlohmann::ordered_json jumps = nlohmann::ordered_json::array();
        for (const JumpEvent& e : r.jumps) {
            nlohmann::ordered_json je;
            je["time"] = e.time;
            je["channel"] = to_string(e.channel);
            je["probabilities"] = e.probabilities;
            jumps.push_back(std::move(je));
        }
        j["jumps"] = std::move(jumps);
        out << j.dump() << '\n';
    }
}

std::vector<std::filesystem::path> write_spectrum(const ExperimentConfig& cfg, const SpectrumResult& r,
                                                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (cfg.output.prefix + "_spectrum.tsv");
    std::ofstream out = open_output(path);
    write_header(out, provenance(cfg, "spectrum"));
    out << "delta\tomega_c_full\tomega_c_effective\tomega2_abs\tdoublet_gap";
    for (std::size_t k = 1; k <= r.full_levels.front().size(); ++k) out << "\tfull_" << k;
    for (std::size_t k = 1; k <= r.effective_levels.front().size(); ++k) out << "\teffective_" << k;
    out << '\n';
    for (std::size_t i = 0; i < r.delta.size(); ++i) {
        out << fmt_short(r.delta[i]) << '\t' << fmt_short(r.omega_c_full[i]) << '\t'
            << fmt_short(r.omega_c_effective[i]) << '\t' << fmt_short(r.omega2_magnitude[i]) << '\t'
            << fmt_short(r.doublet_gap[i]);
        for (double e : r.full_levels[i]) out << '\t' << fmt_short(e);
        for (double e : r.effective_levels[i]) out << '\t' << fmt_short(e);
        out << '\n';
    }
    return {path};
}

std::vector<std::filesystem::path> write_trajectory(const TrajectoryResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const ExperimentConfig& cfg = r.prepared.config;
    const std::string head = provenance(cfg, "trajectory") + "selected_index = " + std::to_string(r.record.index) + "\n";
    std::vector<std::filesystem::path> paths;
    if (!r.record.time_grid.empty()) {
        const auto path = dir / (cfg.output.prefix + "_series.tsv");
        std::ofstream out = open_output(path);
        write_header(out, head);
        write_series(out, r.record.time_grid, r.record.expectations, cfg.run.observables);
        paths.push_back(path);
    }
    const bool has_current = std::any_of(r.record.homodyne_current.begin(), r.record.homodyne_current.end(),
                                         [](const auto& v) { return !v.empty(); });
    if (has_current) {
        const auto path = dir / (cfg.output.prefix + "_homodyne.tsv");
        std::ofstream out = open_output(path);
        write_header(out, head);
        out << "time";
        for (Channel c : all_channels) {
            if (!r.record.homodyne_current[static_cast<int>(c)].empty()) out << "\tcurrent_" << to_string(c);
        }
        out << '\n';
        for (std::size_t i = 1; i < r.record.time_grid.size(); ++i) {
            out << fmt_short(r.record.time_grid[i]);
            for (const auto& v : r.record.homodyne_current) {
                if (!v.empty()) out << '\t' << fmt_short(v[i - 1]);
            }
            out << '\n';
        }
        paths.push_back(path);
    }
    const auto path = dir / (cfg.output.prefix + "_jumps.jsonl");
    std::ofstream out = open_output(path);
    write_jump_log(out, {r.record}, head);
    paths.push_back(path);
    return paths;
}

std::vector<std::filesystem::path> write_ensemble(const EnsembleResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const ExperimentConfig& cfg = r.prepared.config;
    const std::string head = provenance(cfg, "ensemble");
    const std::string& prefix = cfg.output.prefix;
    std::vector<std::filesystem::path> paths;
    if (r.lme) {
        const auto path = dir / (prefix + "_lme.tsv");
        std::ofstream out = open_output(path);
        write_header(out, head);
        write_series(out, r.lme->time_grid, r.lme->expectations, cfg.run.observables);
        paths.push_back(path);
    }
    if (r.average) {
        const auto path = dir / (prefix + "_mean.tsv");
        std::ofstream out = open_output(path);
        write_header(out, head + "trajectories = " + std::to_string(r.average->count) + "\n");
        out << "time";
        for (int k = 0; k < 3; ++k) {
            if (cfg.run.observables[k]) out << '\t' << Observables::names()[k] << "\tse_" << Observables::names()[k];
        }
        out << '\n';
        for (std::size_t i = 0; i < r.average->time_grid.size(); ++i) {
            out << fmt_short(r.average->time_grid[i]);
            for (int k = 0; k < 3; ++k) {
                if (cfg.run.observables[k]) {
                    out << '\t' << fmt_short(r.average->mean[k][i]) << '\t' << fmt_short(r.average->std_error[k][i]);
                }
            }
            out << '\n';
        }
        paths.push_back(path);
    }
    if (r.first_jump) {
        const auto path = dir / (prefix + "_first_jump.tsv");
        std::ofstream out = open_output(path);
        write_tsv(out, *r.first_jump, cfg.output.normalization, head);
        paths.push_back(path);
    }
    if (r.conditional) {
        const auto path = dir / (prefix + "_conditional.tsv");
        std::ofstream out = open_output(path);
        write_tsv(out, *r.conditional, cfg.output.normalization,
                  head + "trigger = " + to_string(cfg.output.trigger) + "\n");
        paths.push_back(path);
    }
    if (cfg.output.jump_log && !r.records.empty()) {
        const auto path = dir / (prefix + "_jumps.jsonl");
        std::ofstream out = open_output(path);
        write_jump_log(out, r.records, head);
        paths.push_back(path);
    }
    return paths;
}

std::vector<std::filesystem::path> write_comparison(const ComparisonResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const ExperimentConfig& cfg = r.prepared.config;
    const std::string head = provenance(cfg, "compare-lme");
    const auto path = dir / (cfg.output.prefix + "_compare.tsv");
    std::ofstream out = open_output(path);
    write_header(out, head);
    out << "time";
    for (int k = 0; k < 3; ++k) {
        const std::string n = Observables::names()[k];
        out << "\tlme_" << n << "\tmean_" << n << "\tse_" << n;
    }
    out << '\n';
    for (std::size_t i = 0; i < r.lme.time_grid.size(); ++i) {
        out << fmt_short(r.lme.time_grid[i]);
        for (int k = 0; k < 3; ++k) {
            out << '\t' << fmt_short(r.lme.expectations[k][i]) << '\t' << fmt_short(r.trajectories.mean[k][i])
                << '\t' << fmt_short(r.trajectories.std_error[k][i]);
        }
        out << '\n';
    }
    const auto rpath = dir / (cfg.output.prefix + "_compare_report.tsv");
    std::ofstream rep = open_output(rpath);
    write_header(rep, head + "trajectories = " + std::to_string(r.trajectories.count) + "\n");
    rep << "observable\tmax_deviation\tmax_deviation_in_se\tlme_exchange_band_prominence\n";
    for (int k = 0; k < 3; ++k) {
        rep << Observables::names()[k] << '\t' << fmt_short(r.max_deviation[k]) << '\t' << fmt_short(r.max_z[k])
            << '\t' << fmt_short(r.band_prominence[k]) << '\n';
    }
    return {path, rpath};
}

std::filesystem::path write_truncation(const ExperimentConfig& cfg, const TruncationReport& r,
                                       const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (cfg.output.prefix + "_truncation.tsv");
    std::ofstream out = open_output(path);
    write_header(out, provenance(cfg, "check-truncation"));
    out << "n_fock\tn_fock_doubled\tomega_c_shift\tmax_level_shift\n";
    out << r.n_fock << '\t' << 2 * r.n_fock << '\t' << fmt_short(r.omega_c_shift) << '\t'
        << fmt_short(r.max_level_shift) << '\n';
    return path;
}

}  // namespace usctraj::cli
