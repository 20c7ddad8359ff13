// mqc_cli.cpp — command-line front end for the monitored quantum chaos experiments

#include "mqc/checks.hpp"
#include "mqc/classical.hpp"
#include "mqc/scenarios.hpp"
#include "mqc/semiclassical.hpp"
#include "mqc/sse.hpp"
#include "mqc/wigner.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kBadInput = 2, kAborted = 3 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string profile{"smoke"};
    int jobs{0};
};

mqc::ExperimentConfig make_config(const Common& o) {
    const auto profile = mqc::parse_profile(o.profile);
    mqc::ExperimentConfig c = o.config.empty() ? mqc::default_config(profile) : mqc::load_config(o.config, profile);
    if (o.seed) c.master_seed = *o.seed;
    if (!o.out.empty()) c.out_dir = o.out;
    if (o.jobs != 0) c.jobs = o.jobs;
    c.validate();
    return c;
}

std::filesystem::path out_file(const mqc::ExperimentConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.out_dir);
    return std::filesystem::path(c.out_dir) / (c.scenario + "_" + name);
}

void print_sweep(const std::vector<mqc::SweepRow>& rows) {
    std::cout << std::setw(10) << "phi" << std::setw(8) << "beta" << std::setw(15) << "process" << std::setw(12) << "lambda" << std::setw(10) << "sem"
              << std::setw(4) << "n" << std::setw(10) << "delta" << std::setw(10) << "sem" << "  status\n";
    for (const auto& r : rows)
        std::cout << std::setw(10) << std::setprecision(4) << r.phi << std::setw(8) << r.beta << std::setw(15) << r.process << std::setw(12)
                  << r.lambda_mean << std::setw(10) << r.sem << std::setw(4) << r.n << std::setw(10) << r.delta_mean << std::setw(10) << r.delta_sem
                  << "  " << r.status << (r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")") << '\n';
}

int report(const std::vector<mqc::CheckResult>& results) {
    bool ok = true;
    for (const auto& r : results) {
        std::cout << r << std::endl;
        ok = ok && r.passed;
    }
    return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-measurement control of quantum chaos in the driven Duffing oscillator"};
    app.require_subcommand(1);
    app.fallthrough();

    Common o;
    app.add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "master seed (overrides the config)");
    app.add_option("--out", o.out, "output directory (overrides the config)");
    app.add_option("--profile", o.profile, "default scale: smoke or paper")->check(CLI::IsMember({"smoke", "paper"}));
    app.add_option("--jobs", o.jobs, "worker threads (0: config value)");

    int points = 2000, transient = 100, periods = 200;
    std::string process = "quantum", state_kind = "trajectory";
    double alpha = 2.0;
    int fock_n = 1, grid_points = 256;

    auto* classical = app.add_subcommand("classical", "classical Poincare section and periodic-orbit detection");
    classical->add_option("--points", points, "stroboscopic points");
    classical->add_option("--transient", transient, "discarded drive periods");

    auto* trajectory = app.add_subcommand("trajectory", "single quantum trajectory and its Poincare section");
    trajectory->add_option("--periods", periods, "drive periods to integrate");
    trajectory->add_option("--transient", transient, "periods excluded from the Poincare file");

    auto* lyapunov = app.add_subcommand("lyapunov", "twin-trajectory Lyapunov exponent at the first (phi, beta) of the config");
    lyapunov->add_option("--process", process, "classical, quantum or semiclassical")
        ->check(CLI::IsMember({"classical", "quantum", "semiclassical"}));

    auto* sweep_phi = app.add_subcommand("sweep-phi", "quantum lambda and windowed negativity versus phi");
    auto* sweep_beta = app.add_subcommand("sweep-beta", "quantum and semiclassical lambda versus beta");
    auto* negativity = app.add_subcommand("negativity", "ensemble negativity time series per phi");

    auto* wigner = app.add_subcommand("wigner", "Wigner function and negativity of a state");
    wigner->add_option("--state", state_kind, "coherent, fock, cat or trajectory")->check(CLI::IsMember({"coherent", "fock", "cat", "trajectory"}));
    wigner->add_option("--alpha", alpha, "coherent / cat amplitude (real)");
    wigner->add_option("--n", fock_n, "Fock level");
    wigner->add_option("--periods", periods, "trajectory length in drive periods (state=trajectory)");
    wigner->add_option("--grid", grid_points, "grid points per axis");

    auto* cat = app.add_subcommand("cat-fringe", "cat-state negativity decay rate versus monitoring phase");
    auto* semiclassical = app.add_subcommand("semiclassical", "Gaussian-closure trajectory");
    semiclassical->add_option("--periods", periods, "drive periods to integrate");
    auto* residence = app.add_subcommand("residence", "semiclassical residence near the classical periodic orbit");
    auto* validate = app.add_subcommand("validate", "fast invariant suite (noise, unraveling average, Wigner oracles, classical anchors)");

    CLI11_PARSE(app, argc, argv);

    mqc::ExperimentConfig cfg;
    try {
        cfg = make_config(o);
    } catch (const std::exception& e) {
        std::cerr << "config rejected: " << e.what() << '\n';
        return kBadInput;
    }
    std::cout << std::setprecision(6);

    try {
        if (*classical) {
            const mqc::SimParams p = cfg.params_at(cfg.phis.front(), cfg.betas.front());
            const auto pts = mqc::classical_poincare(p, points, transient);
            mqc::write_classical_poincare(out_file(cfg, "classical_poincare.csv").string(), pts);
            const auto box = mqc::BoundingBox::of(mqc::to_phase_points(pts));
            std::cout << "attractor box: q in [" << box.q_min << ", " << box.q_max << "], p in [" << box.p_min << ", " << box.p_max << "]\n";
            if (const auto orbit = mqc::find_periodic_orbit(p, transient))
                std::cout << "periodic attractor, period " << orbit->period_cycles << " drive cycles, rms radius " << orbit->rms_radius() << '\n';
            else
                std::cout << "no periodic attractor with period <= 8 cycles\n";
        } else if (*trajectory) {
            const mqc::SimParams p = cfg.params_at(cfg.phis.front(), cfg.betas.front());
            const double dt = p.dt > 0.0 ? p.dt : mqc::default_quantum_dt(p.omega);
            const long steps = std::lround(periods * p.drive_period() / dt);
            const auto noise = mqc::NoisePath::generate(mqc::unraveling_of(p), dt, static_cast<std::size_t>(steps),
                                                        mqc::cell_seed(cfg, "trajectory", p.phi, p.beta));
            mqc::SamplingPlan plan;
            plan.sample_every = std::max(1L, std::lround(p.drive_period() / dt / 100.0));
            const auto rec = mqc::evolve_trajectory(p, mqc::coherent_state(0.0, p.basis_size), static_cast<double>(steps) * dt, noise, plan);
            rec.write_csv(out_file(cfg, "trajectory.csv").string());
            const auto section = mqc::poincare_section(rec, p.omega, periods);
            auto out = std::ofstream(out_file(cfg, "quantum_poincare.csv"));
            out << "n,q,p\n" << std::setprecision(17);
            for (int n = transient; n < periods; ++n) out << n + 1 << ',' << section[static_cast<std::size_t>(n)].q << ',' << section[static_cast<std::size_t>(n)].p << '\n';
            std::cout << "wrote " << rec.size() << " samples and " << std::max(0, periods - transient) << " Poincare points (N = " << p.basis_size << ")\n";
        } else if (*lyapunov) {
            const mqc::CellRequest cell{mqc::parse_process(process), cfg.phis.front(), cfg.betas.front()};
            const auto results = mqc::run_cells(cfg, {cell});
            mqc::LyapunovEstimate per;
            for (const auto& r : results.front()) per.realizations.push_back(r.lyapunov);
            per.write_csv(out_file(cfg, "lyapunov_" + process + "_realizations.csv").string());
            const std::vector<mqc::SweepRow> rows{mqc::summarize_cell(cfg, cell, results.front())};
            mqc::write_sweep_csv(out_file(cfg, "lyapunov_" + process + ".csv"), rows);
            print_sweep(rows);
            if (rows.front().status == "failed") return kAborted;
        } else if (*sweep_phi) {
            const auto rows = mqc::run_phi_sweep(cfg);
            print_sweep(rows);
            try {
                std::cout << "Pearson(lambda, delta) = " << mqc::lambda_delta_correlation(rows) << '\n';
            } catch (const std::invalid_argument&) {
            }
        } else if (*sweep_beta) {
            print_sweep(mqc::run_beta_sweep(cfg));
        } else if (*negativity) {
            for (const auto& cv : mqc::run_negativity_timeseries(cfg))
                std::cout << "phi " << cv.phi << ": surge time " << cv.surge_time << ", last-window delta " << cv.window.mean << " +- " << cv.window.sem
                          << '\n';
        } else if (*wigner) {
            const mqc::SimParams p = cfg.params_at(cfg.phis.front(), cfg.betas.front());
            mqc::StateVector s;
            if (state_kind == "coherent")
                s = mqc::coherent_state(alpha, p.basis_size);
            else if (state_kind == "fock")
                s = mqc::fock_state(fock_n, p.basis_size);
            else if (state_kind == "cat")
                s = mqc::cat_state(alpha, +1, p.basis_size);
            else {
                const double dt = p.dt > 0.0 ? p.dt : mqc::default_quantum_dt(p.omega);
                const long steps = std::lround(periods * p.drive_period() / dt);
                const auto noise = mqc::NoisePath::generate(mqc::unraveling_of(p), dt, static_cast<std::size_t>(steps),
                                                            mqc::cell_seed(cfg, "trajectory", p.phi, p.beta));
                mqc::SamplingPlan plan;
                plan.sample_every = steps;
                plan.snapshot_steps = {steps};
                s = mqc::evolve_trajectory(p, mqc::coherent_state(0.0, p.basis_size), static_cast<double>(steps) * dt, noise, plan).states.back().state;
            }
            const auto grid = mqc::wigner_transform(s, mqc::negativity_grid(s.size(), grid_points));
            grid.write(out_file(cfg, "wigner_" + state_kind + ".txt").string());
            std::cout << "negativity " << mqc::negativity(grid) << " (integral " << grid.integral() << ")\n";
        } else if (*cat) {
            const auto res = mqc::run_cat_fringe_experiment(cfg);
            for (const auto& r : res.rows)
                std::cout << "phi " << r.phi << ": rate " << r.rate << ", model rate " << r.model_rate << ", model weight drift " << r.model_weight_drift
                          << '\n';
            std::cout << "max full-state rate at phi = " << res.phi_of_max_rate << " (fringe angle " << cfg.cat.varphi << ")\n";
        } else if (*semiclassical) {
            const mqc::SimParams p = cfg.params_at(cfg.phis.front(), cfg.betas.front());
            const double dt = mqc::semiclassical_dt(p);
            const long steps = std::lround(periods * p.drive_period() / dt);
            const auto noise = mqc::NoisePath::generate(mqc::unraveling_of(p), dt, static_cast<std::size_t>(steps),
                                                        mqc::cell_seed(cfg, "semiclassical", p.phi, p.beta));
            const auto traj = mqc::evolve_semiclassical(p, mqc::GaussianState::coherent(0.0, 0.0), noise, steps, std::max(1L, steps / (periods * 100L)));
            mqc::write_semiclassical_csv(out_file(cfg, "semiclassical.csv").string(), traj);
            std::cout << "wrote " << traj.size() << " samples\n";
        } else if (*residence) {
            for (const auto& r : mqc::run_residence(cfg))
                std::cout << "phi " << r.phi << ": near-orbit fraction " << r.frac_periodic << " +- " << r.frac_periodic_sem << ", transitions "
                          << r.transitions << ", tube radius " << r.tube_radius << '\n';
        } else if (*validate) {
            return report({mqc::check_noise_statistics(), mqc::check_unraveling_average(500, cfg.jobs), mqc::check_wigner_oracles(),
                           mqc::check_classical_anchor(cfg.jobs)});
        }
    } catch (const mqc::SimulationError& e) {
        std::cerr << "run aborted: " << e.what() << '\n';
        return kAborted;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kBadInput;
    }
    return kOk;
}
