// scenarios.hpp — experiment configuration and the named experiments (sweeps, negativity, cat fringes, residence)
//
// Every table is a pure function of (config, master seed). Lyapunov sweeps are split
// into (process, phi, beta, realization) cells; each cell is persisted as a small JSON
// file under <out>/cells and reused on re-invocation when its fingerprint matches.

#pragma once

#include "mqc/cat.hpp"
#include "mqc/classical.hpp"
#include "mqc/core.hpp"
#include "mqc/fock.hpp"
#include "mqc/lyapunov.hpp"
#include "mqc/noise.hpp"
#include "mqc/parallel.hpp"
#include "mqc/semiclassical.hpp"
#include "mqc/sse.hpp"
#include "mqc/stats.hpp"
#include "mqc/wigner.hpp"

#include "json.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqc {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

enum class Profile { Smoke, Paper };

inline Profile parse_profile(const std::string& s) {
    if (s == "smoke") return Profile::Smoke;
    if (s == "paper") return Profile::Paper;
    throw std::invalid_argument("unknown profile '" + s + "' (expected smoke or paper)");
}

inline std::string profile_name(Profile p) { return p == Profile::Smoke ? "smoke" : "paper"; }

// --------------------------- Number parsing ----------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_plain(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": cannot parse '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument(what + ": trailing characters in '" + s + "'");
    return v;
}

}  // namespace detail

/// Parses "0.5", "pi", "-pi/2", "3*pi/4" or "2pi".
inline double parse_number(const std::string& text, const std::string& what = "value") {
    const std::string s = detail::trim(text);
    if (s.empty()) throw std::invalid_argument(what + ": empty value");
    const auto at = s.find("pi");
    if (at == std::string::npos) return detail::parse_plain(s, what);
    std::string coef = detail::trim(s.substr(0, at));
    if (!coef.empty() && coef.back() == '*') coef = detail::trim(coef.substr(0, coef.size() - 1));
    double c = 1.0;
    if (coef == "-")
        c = -1.0;
    else if (!coef.empty() && coef != "+")
        c = detail::parse_plain(coef, what);
    std::string rest = detail::trim(s.substr(at + 2));
    double d = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/') throw std::invalid_argument(what + ": cannot parse '" + s + "'");
        d = detail::parse_plain(detail::trim(rest.substr(1)), what);
        if (d == 0.0) throw std::invalid_argument(what + ": division by zero in '" + s + "'");
    }
    return c * pi / d;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what = "list") {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (detail::trim(item).empty()) continue;
        out.push_back(parse_number(item, what));
    }
    return out;
}

// --------------------------- Configuration -----------------------------------

struct NegativityOptions {
    double window_periods{2.0};     // averaging window at the end of each Lyapunov run
    int samples_per_period{8};      // Wigner evaluations per drive period inside the window
    int grid_points{128};           // per axis
    double duration_periods{10.0};  // length of the delta(t) time series
    double sample_dt{0.1};          // time-series sampling interval
    double surge_threshold{0.05};
};

struct CatOptions {
    double alpha_abs{2.0};
    double varphi{0.0};  // fringe angle arg(alpha)
    double gamma{0.1};
    std::vector<double> phis{0.0, pi / 8, pi / 4, 3 * pi / 8, pi / 2, 5 * pi / 8, 3 * pi / 4, 7 * pi / 8};
    double duration{3.0};
    int n_realizations{20};
    double sample_dt{0.05};
    int basis_size{35};
    int model_paths{2000};
};

struct ResidenceOptions {
    int transient_cycles{200};
    int cycles{500};
    int samples_per_period{20};
    double tube_fraction{kTubeFraction};
};

struct ExperimentConfig {
    std::string scenario{"default"};
    Profile profile{Profile::Smoke};
    SimParams params;
    bool basis_override{false};  // true when basis_size was given explicitly
    int basis_cap{65};           // applies to the auto rule only; 0 disables the cap
    std::vector<double> phis{pi};
    std::vector<double> betas{0.3};
    LyapunovProtocol protocol;
    NegativityOptions negativity;
    CatOptions cat;
    ResidenceOptions residence;
    std::string out_dir{"out"};
    std::uint64_t master_seed{1};
    int jobs{1};

    int basis_for(double beta) const {
        if (basis_override) return params.basis_size;
        const int n = auto_basis_size(beta);
        return basis_cap > 0 ? std::min(n, basis_cap) : n;
    }

    SimParams params_at(double phi, double beta) const {
        SimParams p = params;
        p.phi = phi;
        p.beta = beta;
        p.basis_size = basis_for(beta);
        p.seed = master_seed;
        return p;
    }

    void validate() const {
        if (phis.empty()) throw std::invalid_argument("config: phi list is empty");
        if (betas.empty()) throw std::invalid_argument("config: beta list is empty");
        params.validate();
        for (double b : betas)
            for (double f : phis) params_at(f, b).validate();
        protocol.validate();
        if (!(negativity.window_periods > 0.0)) throw std::invalid_argument("config: negativity window must be > 0");
        if (negativity.samples_per_period < 1) throw std::invalid_argument("config: negativity samples_per_period must be >= 1");
        if (negativity.grid_points < 16) throw std::invalid_argument("config: negativity grid_points must be >= 16");
        if (negativity.window_periods > protocol.total_cycles)
            throw std::invalid_argument("config: negativity window longer than the Lyapunov run");
        if (!(negativity.duration_periods > 0.0) || !(negativity.sample_dt > 0.0))
            throw std::invalid_argument("config: negativity duration and sample_dt must be > 0");
        if (!(cat.alpha_abs > 0.0) || cat.n_realizations < 1 || !(cat.duration > 0.0) || !(cat.sample_dt > 0.0) || cat.phis.empty())
            throw std::invalid_argument("config: invalid [cat] block");
        if (!coherent_fits(cat.alpha_abs, cat.basis_size)) throw std::invalid_argument("config: cat basis_size too small for alpha");
        if (residence.cycles < 1 || residence.transient_cycles < 0 || residence.samples_per_period < 1 || !(residence.tube_fraction > 0.0))
            throw std::invalid_argument("config: invalid [residence] block");
        if (!(params.dt >= 0.0)) throw std::invalid_argument("config: dt must be > 0");
    }
};

inline ExperimentConfig default_config(Profile profile = Profile::Smoke) {
    ExperimentConfig c;
    c.profile = profile;
    if (profile == Profile::Smoke) {
        c.protocol.total_cycles = 100;
        c.protocol.n_realizations = 5;
        c.basis_cap = 65;
    } else {
        c.protocol.total_cycles = 500;
        c.protocol.n_realizations = 20;
        c.basis_cap = 0;
    }
    return c;
}

/// Reads an INI file over the profile defaults. Unknown sections or keys are rejected.
inline ExperimentConfig load_config(const std::string& path, Profile profile) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
    ExperimentConfig c = default_config(profile);

    const std::map<std::string, std::set<std::string>> known = {
        {"experiment", {"scenario", "seed", "out", "jobs"}},
        {"params", {"gamma", "g", "omega", "beta", "u_abs", "phi", "basis_size", "basis_cap", "dt"}},
        {"sweep", {"phi", "beta"}},
        {"protocol", {"d0", "reset_interval", "total_cycles", "discard_cycles", "n_realizations", "resync_distance"}},
        {"negativity", {"window_periods", "samples_per_period", "grid_points", "duration_periods", "sample_dt", "surge_threshold"}},
        {"cat", {"alpha", "varphi", "gamma", "phi", "duration", "realizations", "sample_dt", "basis_size", "model_paths"}},
        {"residence", {"transient_cycles", "cycles", "samples_per_period", "tube_fraction"}},
    };
    for (const auto& [section, body] : tree) {
        const auto it = known.find(section);
        if (it == known.end()) throw std::invalid_argument("config: unknown section [" + section + "]");
        for (const auto& kv : body)
            if (!it->second.count(kv.first)) throw std::invalid_argument("config: unknown key " + section + "." + kv.first);
    }

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '/'))) return *v;
        return std::nullopt;
    };
    auto num = [&](const std::string& key, double& dst) {
        if (auto v = get(key)) dst = parse_number(*v, key);
    };
    auto integer = [&](const std::string& key, auto& dst) {
        if (auto v = get(key)) {
            const double x = parse_number(*v, key);
            if (x != std::floor(x)) throw std::invalid_argument("config: " + key + " must be an integer");
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(x);
        }
    };

    if (auto v = get("experiment/scenario")) c.scenario = detail::trim(*v);
    if (auto v = get("experiment/seed")) c.master_seed = std::stoull(detail::trim(*v));
    if (auto v = get("experiment/out")) c.out_dir = detail::trim(*v);
    integer("experiment/jobs", c.jobs);

    num("params/gamma", c.params.gamma);
    num("params/g", c.params.g);
    num("params/omega", c.params.omega);
    num("params/beta", c.params.beta);
    num("params/u_abs", c.params.u_abs);
    num("params/phi", c.params.phi);
    num("params/dt", c.params.dt);
    if (get("params/dt") && !(c.params.dt > 0.0)) throw std::invalid_argument("config: params.dt must be > 0");
    if (get("params/basis_size")) {
        integer("params/basis_size", c.params.basis_size);
        c.basis_override = true;
    }
    integer("params/basis_cap", c.basis_cap);

    c.phis = {c.params.phi};
    c.betas = {c.params.beta};
    if (auto v = get("sweep/phi")) c.phis = parse_list(*v, "sweep.phi");
    if (auto v = get("sweep/beta")) c.betas = parse_list(*v, "sweep.beta");

    num("protocol/d0", c.protocol.d0);
    num("protocol/reset_interval", c.protocol.reset_interval);
    integer("protocol/total_cycles", c.protocol.total_cycles);
    integer("protocol/discard_cycles", c.protocol.discard_cycles);
    integer("protocol/n_realizations", c.protocol.n_realizations);
    num("protocol/resync_distance", c.protocol.resync_distance);

    num("negativity/window_periods", c.negativity.window_periods);
    integer("negativity/samples_per_period", c.negativity.samples_per_period);
    integer("negativity/grid_points", c.negativity.grid_points);
    num("negativity/duration_periods", c.negativity.duration_periods);
    num("negativity/sample_dt", c.negativity.sample_dt);
    num("negativity/surge_threshold", c.negativity.surge_threshold);

    num("cat/alpha", c.cat.alpha_abs);
    num("cat/varphi", c.cat.varphi);
    num("cat/gamma", c.cat.gamma);
    if (auto v = get("cat/phi")) c.cat.phis = parse_list(*v, "cat.phi");
    num("cat/duration", c.cat.duration);
    integer("cat/realizations", c.cat.n_realizations);
    num("cat/sample_dt", c.cat.sample_dt);
    integer("cat/basis_size", c.cat.basis_size);
    integer("cat/model_paths", c.cat.model_paths);

    integer("residence/transient_cycles", c.residence.transient_cycles);
    integer("residence/cycles", c.residence.cycles);
    integer("residence/samples_per_period", c.residence.samples_per_period);
    num("residence/tube_fraction", c.residence.tube_fraction);

    c.validate();
    return c;
}

// --------------------------- Seeds and cell files ----------------------------

/// Seed of one (process, phi, beta) cell. Coordinates are hashed by value, not by list
/// position, so any split of a sweep into sub-sweeps reproduces the same cells.
inline std::uint64_t cell_seed(const ExperimentConfig& c, const std::string& process, double phi, double beta) {
    return derive_seed(c.master_seed, {hash_string(c.scenario), hash_string(process), hash_double(phi), hash_double(beta)});
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Everything besides (phi, beta, realization) that changes a cell's result.
inline std::uint64_t cell_fingerprint(const ExperimentConfig& c, const std::string& process, double phi, double beta) {
    const SimParams p = c.params_at(phi, beta);
    return derive_seed(cell_seed(c, process, phi, beta),
                       {hash_double(p.gamma), hash_double(p.g), hash_double(p.omega), hash_double(p.u_abs), static_cast<std::uint64_t>(p.basis_size),
                        hash_double(p.dt), hash_double(c.protocol.d0), hash_double(c.protocol.reset_interval),
                        static_cast<std::uint64_t>(c.protocol.total_cycles), static_cast<std::uint64_t>(c.protocol.discard_cycles),
                        hash_double(c.protocol.underflow), hash_double(c.protocol.resync_distance), hash_double(c.negativity.window_periods),
                        static_cast<std::uint64_t>(c.negativity.samples_per_period), static_cast<std::uint64_t>(c.negativity.grid_points)});
}

struct CellResult {
    RealizationResult lyapunov;
    double delta_mean{nan_value};  // windowed negativity of the fiducial trajectory
    int delta_samples{0};
};

inline std::filesystem::path cell_path(const ExperimentConfig& c, const std::string& process, double phi, double beta, int realization) {
    return std::filesystem::path(c.out_dir) / "cells" / c.scenario /
           (process + "_phi-" + hex64(hash_double(phi)) + "_beta-" + hex64(hash_double(beta)) + "_r" + std::to_string(realization) + ".json");
}

namespace detail {

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
inline double number_from(const nlohmann::json& j) { return j.is_null() ? nan_value : j.get<double>(); }

}  // namespace detail

inline void save_cell(const std::filesystem::path& path, std::uint64_t fingerprint, double phi, double beta, const CellResult& r) {
    std::filesystem::create_directories(path.parent_path());
    nlohmann::json j;
    j["fingerprint"] = hex64(fingerprint);
    j["phi"] = phi;
    j["beta"] = beta;
    j["realization"] = r.lyapunov.index;
    j["lambda"] = detail::number_or_null(r.lyapunov.lambda);
    j["excluded"] = r.lyapunov.excluded;
    j["diagnostic"] = r.lyapunov.diagnostic;
    j["n_resets"] = r.lyapunov.n_resets;
    j["n_resyncs"] = r.lyapunov.n_resyncs;
    j["max_reset_error"] = r.lyapunov.max_reset_error;
    j["running"] = r.lyapunov.running;
    j["delta_mean"] = detail::number_or_null(r.delta_mean);
    j["delta_samples"] = r.delta_samples;
    // Write-then-rename so an interrupted run never leaves a truncated cell behind.
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write cell file " + tmp);
        out << std::setprecision(17) << j.dump(1) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

inline std::optional<CellResult> load_cell(const std::filesystem::path& path, std::uint64_t fingerprint) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("fingerprint").get<std::string>() != hex64(fingerprint)) return std::nullopt;
        CellResult r;
        r.lyapunov.index = j.at("realization").get<int>();
        r.lyapunov.lambda = detail::number_from(j.at("lambda"));
        r.lyapunov.excluded = j.at("excluded").get<bool>();
        r.lyapunov.diagnostic = j.at("diagnostic").get<std::string>();
        r.lyapunov.n_resets = j.at("n_resets").get<int>();
        r.lyapunov.n_resyncs = j.at("n_resyncs").get<int>();
        r.lyapunov.max_reset_error = j.at("max_reset_error").get<double>();
        r.lyapunov.running = j.at("running").get<std::vector<double>>();
        r.delta_mean = detail::number_from(j.at("delta_mean"));
        r.delta_samples = j.at("delta_samples").get<int>();
        return r;
    } catch (const std::exception&) {
        return std::nullopt;  // unreadable cell: recompute
    }
}

// --------------------------- Lyapunov cells ----------------------------------

enum class ProcessKind { Classical, Quantum, Semiclassical };

inline std::string process_name(ProcessKind k) {
    switch (k) {
        case ProcessKind::Classical: return "classical";
        case ProcessKind::Quantum: return "quantum";
        case ProcessKind::Semiclassical: return "semiclassical";
    }
    return "?";
}

inline ProcessKind parse_process(const std::string& s) {
    if (s == "classical") return ProcessKind::Classical;
    if (s == "quantum") return ProcessKind::Quantum;
    if (s == "semiclassical") return ProcessKind::Semiclassical;
    throw std::invalid_argument("unknown process '" + s + "' (expected classical, quantum or semiclassical)");
}

inline GridSpec negativity_grid(int basis_size, int points) {
    const double ext = std::sqrt(2.0 * basis_size) + 3.0;
    return {-ext, ext, -ext, ext, points, points};
}

/// Classical realizations start from a small random offset around the origin; with no
/// noise they would otherwise all be identical and the SEM would be zero.
inline constexpr double kClassicalOffset = 0.1;

inline ClassicalState classical_initial(std::uint64_t seed) {
    NoiseStream rng(derive_seed(seed, {hash_string("classical-initial")}));
    const double x = kClassicalOffset * rng.gaussian();
    const double v = kClassicalOffset * rng.gaussian();
    return {x, v, 0.0};
}

/// One realization of one cell. Quantum cells also record the fiducial's negativity over
/// the last window_periods drive periods.
inline CellResult run_cell(const ExperimentConfig& c, ProcessKind kind, double phi, double beta, int realization) {
    const SimParams p = c.params_at(phi, beta);
    const UnravelingSpec spec = unraveling_of(p);
    const std::uint64_t seed = derive_seed(cell_seed(c, process_name(kind), phi, beta), {static_cast<std::uint64_t>(realization)});
    const double period = p.drive_period();
    CellResult out;

    switch (kind) {
        case ProcessKind::Classical: {
            ClassicalProcess proc(p, classical_initial(seed), classical_dt(p));
            out.lyapunov = run_twin_realization(proc, spec, c.protocol, period, seed, realization);
            break;
        }
        case ProcessKind::Semiclassical: {
            SemiclassicalProcess proc(p, spec, GaussianState::coherent(0.0, 0.0), semiclassical_dt(p));
            out.lyapunov = run_twin_realization(proc, spec, c.protocol, period, seed, realization);
            break;
        }
        case ProcessKind::Quantum: {
            auto ops = std::make_shared<const OperatorSet>(build_operators(p));
            const double dt = p.dt > 0.0 ? p.dt : default_quantum_dt(p.omega);
            SseProcess proc(ops, spec, coherent_state(0.0, p.basis_size), dt);
            const long steps_per_reset = std::max(1L, std::lround(c.protocol.reset_interval * period / dt));
            const long total_steps = steps_per_reset * std::lround(c.protocol.total_cycles / c.protocol.reset_interval);
            const long per_period = std::max(1L, std::lround(period / dt));
            const long window_start = total_steps - std::lround(c.negativity.window_periods * static_cast<double>(per_period));
            const long stride = std::max(1L, per_period / c.negativity.samples_per_period);
            const GridSpec grid = negativity_grid(p.basis_size, c.negativity.grid_points);
            double acc = 0.0;
            int count = 0;
            auto observer = [&](long step, const SseProcess& fid) {
                if (step <= window_start || step % stride != 0) return;
                acc += negativity(wigner_transform(fid.state(), grid, false));
                ++count;
            };
            out.lyapunov = run_twin_realization(proc, spec, c.protocol, period, seed, realization, observer);
            if (count > 0 && !out.lyapunov.excluded) {
                out.delta_mean = acc / count;
                out.delta_samples = count;
            }
            break;
        }
    }
    return out;
}

struct CellRequest {
    ProcessKind kind;
    double phi;
    double beta;
};

/// Runs (or reloads) every realization of every requested cell on the worker pool.
inline std::vector<std::vector<CellResult>> run_cells(const ExperimentConfig& c, const std::vector<CellRequest>& cells, bool persist = true) {
    const int nr = c.protocol.n_realizations;
    std::vector<std::vector<CellResult>> results(cells.size(), std::vector<CellResult>(static_cast<std::size_t>(nr)));
    struct Job {
        std::size_t cell;
        int r;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto fp = cell_fingerprint(c, process_name(cells[i].kind), cells[i].phi, cells[i].beta);
        for (int r = 0; r < nr; ++r) {
            if (persist) {
                if (auto cached = load_cell(cell_path(c, process_name(cells[i].kind), cells[i].phi, cells[i].beta, r), fp)) {
                    results[i][static_cast<std::size_t>(r)] = *cached;
                    continue;
                }
            }
            jobs.push_back({i, r});
        }
    }
    parallel_for(jobs.size(), c.jobs, [&](std::size_t k) {
        const auto [i, r] = jobs[k];
        const auto& cell = cells[i];
        CellResult res = run_cell(c, cell.kind, cell.phi, cell.beta, r);
        if (persist) {
            const auto name = process_name(cell.kind);
            save_cell(cell_path(c, name, cell.phi, cell.beta, r), cell_fingerprint(c, name, cell.phi, cell.beta), cell.phi, cell.beta, res);
        }
        results[i][static_cast<std::size_t>(r)] = std::move(res);
    });
    return results;
}

// --------------------------- Sweep tables ------------------------------------

struct SweepRow {
    std::string process;
    double phi{0.0};
    double beta{0.0};
    int basis_size{0};
    double lambda_mean{nan_value};
    double sem{nan_value};
    int n{0};
    int n_excluded{0};
    double delta_mean{nan_value};
    double delta_sem{nan_value};
    int delta_n{0};
    std::string status{"ok"};  // ok, partial (some realizations excluded) or failed
    std::string diagnostic;
};

inline SweepRow summarize_cell(const ExperimentConfig& c, const CellRequest& cell, const std::vector<CellResult>& rs) {
    SweepRow row;
    row.process = process_name(cell.kind);
    row.phi = cell.phi;
    row.beta = cell.beta;
    row.basis_size = cell.kind == ProcessKind::Quantum ? c.basis_for(cell.beta) : 0;
    std::vector<double> lambdas, deltas;
    for (const auto& r : rs) {
        if (r.lyapunov.excluded) {
            ++row.n_excluded;
            if (row.diagnostic.empty()) row.diagnostic = r.lyapunov.diagnostic;
            continue;
        }
        lambdas.push_back(r.lyapunov.lambda);
        if (std::isfinite(r.delta_mean)) deltas.push_back(r.delta_mean);
    }
    row.n = static_cast<int>(lambdas.size());
    if (!lambdas.empty()) {
        row.lambda_mean = stats::mean(lambdas);
        row.sem = stats::sem(lambdas);
    }
    if (!deltas.empty()) {
        row.delta_mean = stats::mean(deltas);
        row.delta_sem = stats::sem(deltas);
        row.delta_n = static_cast<int>(deltas.size());
    }
    row.status = lambdas.empty() ? "failed" : (row.n_excluded > 0 ? "partial" : "ok");
    return row;
}

namespace detail {

inline void write_value(std::ostream& out, double v) {
    if (std::isfinite(v))
        out << v;
    else
        out << "nan";
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

inline std::ofstream open_csv(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17);
    return out;
}

}  // namespace detail

inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    auto out = detail::open_csv(path);
    out << "phi,beta,lambda_mean,sem,n,delta_mean,delta_sem,delta_n,process,basis_size,n_excluded,status,diagnostic\n";
    for (const auto& r : rows) {
        out << r.phi << ',' << r.beta << ',';
        detail::write_value(out, r.lambda_mean);
        out << ',';
        detail::write_value(out, r.sem);
        out << ',' << r.n << ',';
        detail::write_value(out, r.delta_mean);
        out << ',';
        detail::write_value(out, r.delta_sem);
        out << ',' << r.delta_n << ',' << r.process << ',' << r.basis_size << ',' << r.n_excluded << ',' << r.status << ','
            << detail::csv_quote(r.diagnostic) << '\n';
    }
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& c, const std::vector<CellRequest>& cells, bool persist = true) {
    const auto results = run_cells(c, cells, persist);
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < cells.size(); ++i) rows.push_back(summarize_cell(c, cells[i], results[i]));
    return rows;
}

/// Quantum lambda and windowed negativity for every phi of the config at its first beta.
inline std::vector<SweepRow> run_phi_sweep(const ExperimentConfig& c, bool persist = true) {
    c.validate();
    std::vector<double> phis = c.phis;
    std::sort(phis.begin(), phis.end());
    std::vector<CellRequest> cells;
    for (double phi : phis) cells.push_back({ProcessKind::Quantum, phi, c.betas.front()});
    auto rows = run_sweep(c, cells, persist);
    if (persist) write_sweep_csv(std::filesystem::path(c.out_dir) / (c.scenario + "_phi_sweep.csv"), rows);
    return rows;
}

/// Quantum and semiclassical lambda (and quantum negativity) on the beta x phi grid.
inline std::vector<SweepRow> run_beta_sweep(const ExperimentConfig& c, bool persist = true) {
    c.validate();
    std::vector<CellRequest> cells;
    for (double beta : c.betas)
        for (double phi : c.phis) {
            cells.push_back({ProcessKind::Quantum, phi, beta});
            cells.push_back({ProcessKind::Semiclassical, phi, beta});
        }
    auto rows = run_sweep(c, cells, persist);
    if (persist) write_sweep_csv(std::filesystem::path(c.out_dir) / (c.scenario + "_beta_sweep.csv"), rows);
    return rows;
}

/// Pearson correlation between the lambda and delta columns over rows where both exist.
inline double lambda_delta_correlation(const std::vector<SweepRow>& rows) {
    std::vector<double> l, d;
    for (const auto& r : rows)
        if (std::isfinite(r.lambda_mean) && std::isfinite(r.delta_mean)) {
            l.push_back(r.lambda_mean);
            d.push_back(r.delta_mean);
        }
    if (l.size() < 3) throw std::invalid_argument("lambda_delta_correlation: need at least three rows with both columns");
    return stats::pearson(l, d);
}

// --------------------------- Negativity time series --------------------------

struct NegativityCurve {
    double phi{0.0};
    DeltaBand band;
    double surge_time{nan_value};  // first ensemble-mean crossing of the surge threshold
    MeanWithError window;          // average over the last window_periods
};

inline std::vector<NegativityCurve> run_negativity_timeseries(const ExperimentConfig& c, bool persist = true) {
    c.validate();
    const double beta = c.betas.front();
    const double period = c.params.drive_period();
    const double duration = c.negativity.duration_periods * period;
    const int nr = c.protocol.n_realizations;

    std::vector<double> phis = c.phis;
    std::sort(phis.begin(), phis.end());
    std::vector<std::vector<DeltaSeries>> series(phis.size(), std::vector<DeltaSeries>(static_cast<std::size_t>(nr)));
    parallel_for(phis.size() * static_cast<std::size_t>(nr), c.jobs, [&](std::size_t k) {
        const std::size_t i = k / static_cast<std::size_t>(nr);
        const int r = static_cast<int>(k % static_cast<std::size_t>(nr));
        const SimParams p = c.params_at(phis[i], beta);
        const UnravelingSpec spec = unraveling_of(p);
        const double dt = p.dt > 0.0 ? p.dt : default_quantum_dt(p.omega);
        const long steps = std::lround(duration / dt);
        const long every = std::max(1L, std::lround(c.negativity.sample_dt / dt));
        const auto seed = derive_seed(cell_seed(c, "negativity", phis[i], beta), {static_cast<std::uint64_t>(r)});
        const NoisePath noise = NoisePath::generate(spec, dt, static_cast<std::size_t>(steps), seed);
        SamplingPlan plan;
        plan.sample_every = every;
        for (long s = 0; s <= steps; s += every) plan.snapshot_steps.push_back(s);
        auto ops = std::make_shared<const OperatorSet>(build_operators(p));
        const auto rec = evolve_trajectory(ops, spec, coherent_state(0.0, p.basis_size), static_cast<double>(steps) * dt, noise, plan);
        const GridSpec grid = negativity_grid(p.basis_size, c.negativity.grid_points);
        DeltaSeries ds;
        for (const auto& snap : rec.states) {
            ds.t.push_back(snap.t);
            ds.delta.push_back(negativity(wigner_transform(snap.state, grid, false)));
        }
        series[i][static_cast<std::size_t>(r)] = std::move(ds);
    });

    std::vector<NegativityCurve> curves;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        NegativityCurve cv;
        cv.phi = phis[i];
        cv.band = ensemble_band(series[i]);
        for (std::size_t k = 0; k < cv.band.t.size(); ++k)
            if (cv.band.mean[k] > c.negativity.surge_threshold) {
                cv.surge_time = cv.band.t[k];
                break;
            }
        const double t_end = cv.band.t.back();
        cv.window = negativity_time_average(series[i], std::max(0.0, t_end - c.negativity.window_periods * period), t_end);
        curves.push_back(std::move(cv));
    }

    if (persist) {
        const std::filesystem::path dir(c.out_dir);
        auto out = detail::open_csv(dir / (c.scenario + "_negativity_timeseries.csv"));
        out << "phi,t,delta_mean,delta_sem\n";
        for (const auto& cv : curves)
            for (std::size_t k = 0; k < cv.band.t.size(); ++k) {
                out << cv.phi << ',' << cv.band.t[k] << ',' << cv.band.mean[k] << ',';
                detail::write_value(out, cv.band.sem[k]);
                out << '\n';
            }
        auto sum = detail::open_csv(dir / (c.scenario + "_negativity_summary.csv"));
        sum << "phi,surge_time,window_mean,window_sem,n\n";
        for (const auto& cv : curves) {
            sum << cv.phi << ',';
            detail::write_value(sum, cv.surge_time);
            sum << ',' << cv.window.mean << ',';
            detail::write_value(sum, cv.window.sem);
            sum << ',' << cv.window.n << '\n';
        }
    }
    return curves;
}

// --------------------------- Cat fringe experiment ---------------------------

struct CatFringeRow {
    double phi{0.0};
    double rate{0.0};  // full-state negativity decay rate
    double residual{0.0};
    int fit_points{0};
    double model_rate{0.0};          // decay rate of the mean visibility 4|c+|^2|c-|^2
    double model_weight_drift{0.0};  // max over paths of | |c+|^2(T) - |c+|^2(0) |
};

struct CatFringeResult {
    std::vector<CatFringeRow> rows;
    double phi_of_max_rate{0.0};
    double phi_of_max_model_rate{0.0};
};

/// Mean visibility of the two-coefficient model over `paths` realizations, sampled every
/// sample_dt. The SSE noise term carries sqrt(2 Gamma) from L = sqrt(2 Gamma) a, so the model
/// increment is sqrt(2 Gamma) dW.
inline DeltaBand cat_model_visibility(const CatOptions& o, double phi, double dt, std::uint64_t seed, double* max_drift = nullptr) {
    const long steps = std::lround(o.duration / dt);
    const long every = std::max(1L, std::lround(o.sample_dt / dt));
    const double scale = std::sqrt(2.0 * o.gamma * dt);
    std::vector<DeltaSeries> series(static_cast<std::size_t>(o.model_paths));
    double drift = 0.0;
    for (int m = 0; m < o.model_paths; ++m) {
        NoiseStream rng(derive_seed(seed, {static_cast<std::uint64_t>(m)}));
        CatCoefficients cc;
        cc.alpha = std::polar(o.alpha_abs, o.varphi);
        const double w0 = cc.weight_plus();
        auto& s = series[static_cast<std::size_t>(m)];
        for (long k = 0; k <= steps; ++k) {
            if (k % every == 0) {
                s.t.push_back(static_cast<double>(k) * dt);
                s.delta.push_back(cc.visibility());
            }
            if (k < steps) cc = cat_coefficient_step(cc, phi, dt, scale * rng.gaussian());
        }
        drift = std::max(drift, std::abs(cc.weight_plus() - w0));
    }
    if (max_drift) *max_drift = drift;
    return ensemble_band(series);
}

inline CatFringeResult run_cat_fringe_experiment(const ExperimentConfig& c, bool persist = true) {
    c.validate();
    const CatOptions& o = c.cat;
    SimParams p = c.params;
    p.gamma = o.gamma;
    p.u_abs = 1.0;
    p.basis_size = o.basis_size;
    const StateVector cat = cat_state(std::polar(o.alpha_abs, o.varphi), +1, o.basis_size);
    DecayOptions opt;
    opt.sample_dt = o.sample_dt;
    opt.dt = p.dt;
    opt.grid = negativity_grid(o.basis_size, c.negativity.grid_points);
    opt.seed = derive_seed(c.master_seed, {hash_string(c.scenario), hash_string("cat")});

    std::vector<DecayRate> full(o.phis.size());
    parallel_for(o.phis.size(), c.jobs, [&](std::size_t i) {
        const double phi = o.phis[i];
        full[i] = negativity_decay_rate(cat, p, std::span<const double>(&phi, 1), o.duration, o.n_realizations, opt).front();
    });

    CatFringeResult res;
    const double dt = p.dt > 0.0 ? p.dt : default_quantum_dt(p.omega);
    double best = -1.0, best_model = -1.0;
    for (std::size_t i = 0; i < o.phis.size(); ++i) {
        CatFringeRow row;
        row.phi = o.phis[i];
        row.rate = full[i].rate;
        row.residual = full[i].residual;
        row.fit_points = full[i].fit_points;
        const DeltaBand vis = cat_model_visibility(o, row.phi, dt * 10.0, derive_seed(opt.seed, {hash_string("model"), hash_double(row.phi)}),
                                                   &row.model_weight_drift);
        if (vis.mean.back() > 1.0 - 1e-12)
            row.model_rate = 0.0;  // weights frozen: no decay to fit
        else
            row.model_rate = std::max(0.0, -fit_decay(vis).slope);
        if (row.rate > best) {
            best = row.rate;
            res.phi_of_max_rate = row.phi;
        }
        if (row.model_rate > best_model) {
            best_model = row.model_rate;
            res.phi_of_max_model_rate = row.phi;
        }
        res.rows.push_back(row);
    }
    if (persist) {
        auto out = detail::open_csv(std::filesystem::path(c.out_dir) / (c.scenario + "_cat_fringe.csv"));
        out << "phi,rate,residual,fit_points,model_rate,model_weight_drift\n";
        for (const auto& r : res.rows)
            out << r.phi << ',' << r.rate << ',' << r.residual << ',' << r.fit_points << ',' << r.model_rate << ',' << r.model_weight_drift << '\n';
    }
    return res;
}

// --------------------------- Regime residence --------------------------------

struct ResidenceRow {
    double phi{0.0};
    double frac_periodic{0.0};
    double frac_periodic_sem{0.0};
    double transitions{0.0};  // mean per realization
    double tube_radius{0.0};
    int n{0};
};

/// Semiclassical residence near the classical periodic orbit, one row per phi.
inline std::vector<ResidenceRow> run_residence(const ExperimentConfig& c, bool persist = true) {
    c.validate();
    const double beta = c.betas.front();
    const SimParams base = c.params_at(c.phis.front(), beta);
    const auto orbit = find_periodic_orbit(base, c.residence.transient_cycles);
    if (!orbit) throw SimulationError("residence: classical motion is not periodic for these parameters");
    const int nr = c.protocol.n_realizations;
    std::vector<double> phis = c.phis;
    std::sort(phis.begin(), phis.end());

    std::vector<std::vector<Residence>> per(phis.size(), std::vector<Residence>(static_cast<std::size_t>(nr)));
    parallel_for(phis.size() * static_cast<std::size_t>(nr), c.jobs, [&](std::size_t k) {
        const std::size_t i = k / static_cast<std::size_t>(nr);
        const int r = static_cast<int>(k % static_cast<std::size_t>(nr));
        const SimParams p = c.params_at(phis[i], beta);
        const UnravelingSpec spec = unraveling_of(p);
        const double dt = semiclassical_dt(p);
        const long per_period = std::max(1L, std::lround(p.drive_period() / dt));
        const long stride = std::max(1L, per_period / c.residence.samples_per_period);
        const long transient = per_period * c.residence.transient_cycles;
        const long total = transient + per_period * c.residence.cycles;
        NoiseStream rng(derive_seed(cell_seed(c, "residence", phis[i], beta), {static_cast<std::uint64_t>(r)}));
        GaussianState s = GaussianState::coherent(0.0, 0.0);
        std::vector<PhasePoint> pts;
        for (long step = 1; step <= total; ++step) {
            s = gaussian_step(s, p, spec, dt, sample_increment(spec, dt, rng).dxi);
            s.t = static_cast<double>(step) * dt;
            if (step > transient && step % stride == 0) pts.push_back({s.q, s.p});
        }
        per[i][static_cast<std::size_t>(r)] = regime_residence(pts, *orbit, c.residence.tube_fraction);
    });

    std::vector<ResidenceRow> rows;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        std::vector<double> fr, tr;
        for (const auto& r : per[i]) {
            fr.push_back(r.frac_periodic);
            tr.push_back(r.transitions);
        }
        rows.push_back({phis[i], stats::mean(fr), stats::sem(fr), stats::mean(tr), per[i].front().tube_radius, nr});
    }
    if (persist) {
        auto out = detail::open_csv(std::filesystem::path(c.out_dir) / (c.scenario + "_residence.csv"));
        out << "phi,frac_periodic,frac_periodic_sem,frac_chaotic,transitions,tube_radius,n\n";
        for (const auto& r : rows)
            out << r.phi << ',' << r.frac_periodic << ',' << r.frac_periodic_sem << ',' << 1.0 - r.frac_periodic << ',' << r.transitions << ','
                << r.tube_radius << ',' << r.n << '\n';
    }
    return rows;
}

}  // namespace mqc
