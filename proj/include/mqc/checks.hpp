// checks.hpp — acceptance and release-gate checks with their independent oracles
//
// Each check returns a CheckResult carrying the measured numbers; the acceptance test
// binary and the `validate` subcommand both print them one per line.

#pragma once

#include "mqc/classical.hpp"
#include "mqc/core.hpp"
#include "mqc/fock.hpp"
#include "mqc/lindblad.hpp"
#include "mqc/lyapunov.hpp"
#include "mqc/noise.hpp"
#include "mqc/scenarios.hpp"
#include "mqc/semiclassical.hpp"
#include "mqc/sse.hpp"
#include "mqc/stats.hpp"
#include "mqc/wigner.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mqc {

struct CheckResult {
    std::string id;
    std::string title;
    bool passed{false};
    std::string measured;
    double seconds{0.0};
};

inline std::ostream& operator<<(std::ostream& out, const CheckResult& r) {
    return out << r.id << ' ' << (r.passed ? "PASS" : "FAIL") << "  " << r.title << " | " << r.measured << " | " << std::fixed
               << std::setprecision(1) << r.seconds << "s" << std::defaultfloat;
}

// Times `body`, turning an escaped exception into a failed check.
inline CheckResult timed_check(const std::string& id, const std::string& title, const std::function<void(CheckResult&)>& body) {
    CheckResult r;
    r.id = id;
    r.title = title;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.measured += (r.measured.empty() ? "" : "; ") + std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

namespace detail {

inline std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
}

inline std::string pm(double m, double e) { return fmt(m) + " +- " + fmt(e, 2); }

}  // namespace detail

// --------------------------- Independent oracles -----------------------------

/// <x|alpha> for the dimensionless quadrature Q = (a + a^dag)/sqrt 2.
inline cplx coherent_wavefunction(cplx alpha, double x) {
    return std::pow(pi, -0.25) * std::exp(-0.5 * x * x + std::sqrt(2.0) * alpha * x - 0.5 * alpha * alpha - 0.5 * std::norm(alpha));
}

/// Negativity of N(|alpha> + s|-alpha>) by direct quadrature of
/// W(q, p) = (1/pi) Int psi*(q + y) psi(q - y) e^{2ipy} dy on a dense grid, using only the
/// closed-form wavefunction (no Fock basis).
inline double cat_negativity_oracle(cplx alpha, int rel_sign, int points = 401) {
    const double norm = cat_norm_factor(alpha, rel_sign);
    auto psi = [&](double x) { return norm * (coherent_wavefunction(alpha, x) + static_cast<double>(rel_sign) * coherent_wavefunction(-alpha, x)); };
    const double ext = std::sqrt(2.0) * std::abs(alpha) + 6.0;
    const double h = 2.0 * ext / (points - 1);
    const int ny = 2 * points;
    const double hy = h / 2.0;
    std::vector<double> ys(static_cast<std::size_t>(ny));
    for (int k = 0; k < ny; ++k) ys[static_cast<std::size_t>(k)] = (k - ny / 2) * hy;
    double total = 0.0;
    std::vector<cplx> f(static_cast<std::size_t>(ny));
    for (int i = 0; i < points; ++i) {
        const double q = -ext + i * h;
        for (int k = 0; k < ny; ++k) {
            const double y = ys[static_cast<std::size_t>(k)];
            f[static_cast<std::size_t>(k)] = std::conj(psi(q + y)) * psi(q - y);
        }
        for (int j = 0; j < points; ++j) {
            const double p = -ext + j * h;
            cplx acc = 0.0;
            const cplx step = std::exp(2.0 * I * p * hy);
            cplx ph = std::exp(2.0 * I * p * ys.front());
            for (int k = 0; k < ny; ++k) {
                acc += f[static_cast<std::size_t>(k)] * ph;
                ph *= step;
            }
            total += std::abs(acc.real() * hy / pi);
        }
    }
    return total * h * h - 1.0;
}

/// Fock |1>: W = (2(q^2 + p^2) - 1) e^{-(q^2 + p^2)} / pi. The radial integral of |W| is
/// 4 e^{-1/2} - 1, so delta = 4 e^{-1/2} - 2.
inline double fock1_negativity_exact() { return 4.0 * std::exp(-0.5) - 2.0; }

// --------------------------- A1 ----------------------------------------------

inline LyapunovEstimate classical_lyapunov(double gamma, const LyapunovProtocol& proto, std::uint64_t seed, int jobs) {
    SimParams p;
    p.gamma = gamma;
    return estimate_lyapunov([&](int, std::uint64_t s) { return ClassicalProcess(p, classical_initial(s), classical_dt(p)); }, unraveling_of(p),
                             proto, p.drive_period(), seed, jobs);
}

inline LyapunovProtocol classical_anchor_protocol() {
    LyapunovProtocol proto;
    proto.total_cycles = 500;
    proto.n_realizations = 20;
    return proto;
}

inline CheckResult check_classical_anchor(int jobs = 1) {
    return timed_check("A1", "classical Lyapunov anchors (Gamma=0.10 -> 0.16+-0.02, Gamma=0.05 -> -0.05+-0.02)", [&](CheckResult& r) {
        const auto proto = classical_anchor_protocol();
        const auto a = classical_lyapunov(0.10, proto, 101, jobs);
        const auto b = classical_lyapunov(0.05, proto, 102, jobs);
        r.passed = std::abs(a.lambda_mean - 0.16) <= 0.02 && std::abs(b.lambda_mean + 0.05) <= 0.02;
        r.measured = "lambda(0.10) = " + detail::pm(a.lambda_mean, a.sem) + ", lambda(0.05) = " + detail::pm(b.lambda_mean, b.sem);
    });
}

// --------------------------- A2 ----------------------------------------------

struct UnravelingAverage {
    double trace_distance{0.0};
    double min_eigenvalue{0.0};
};

/// Mean of n trajectory projectors at time t versus the master equation.
inline UnravelingAverage unraveling_average(const SimParams& p, const Matrix& reference, double t, int n_traj, std::uint64_t seed, int jobs) {
    auto ops = std::make_shared<const OperatorSet>(build_operators(p));
    const UnravelingSpec spec = unraveling_of(p);
    const double dt = p.dt > 0.0 ? p.dt : default_quantum_dt(p.omega);
    const long steps = std::lround(t / dt);
    std::vector<Matrix> partial(static_cast<std::size_t>(n_traj));
    parallel_for(static_cast<std::size_t>(n_traj), jobs, [&](std::size_t k) {
        SseStepper stepper(ops, spec);
        StateVector s = coherent_state(0.0, p.basis_size);
        NoiseStream rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
        for (long i = 0; i < steps; ++i) stepper.step(s.amps, static_cast<double>(i) * dt, dt, sample_increment(spec, dt, rng).dxi);
        partial[k] = projector(s);
    });
    Matrix mean = Matrix::Zero(p.basis_size, p.basis_size);
    for (const auto& m : partial) mean += m;
    mean /= static_cast<double>(n_traj);
    return {trace_distance(mean, reference), min_eigenvalue(mean)};
}

inline CheckResult check_unraveling_average(int n_traj = 500, int jobs = 1) {
    return timed_check("A2", "mean of " + std::to_string(n_traj) + " trajectory projectors matches the master equation (trace distance < 0.05)",
                       [&](CheckResult& r) {
                           SimParams p;
                           p.beta = 1.0;
                           p.basis_size = 35;
                           const double t = 5.0;
                           const Matrix rho0 = projector(coherent_state(0.0, p.basis_size));
                           const Matrix ref = evolve_density(p, rho0, t);
                           r.passed = true;
                           const std::vector<std::pair<std::string, UnravelingSpec>> cases = {
                               {"u=0", {0.0, 0.0}}, {"u=1", {1.0, 0.0}}, {"u=e^{-i pi}", {1.0, pi / 2}}};
                           for (std::size_t k = 0; k < cases.size(); ++k) {
                               SimParams pk = p;
                               pk.u_abs = cases[k].second.u_abs;
                               pk.phi = cases[k].second.phi;
                               const auto avg = unraveling_average(pk, ref, t, n_traj, derive_seed(202, {k}), jobs);
                               r.passed = r.passed && avg.trace_distance < 0.05;
                               r.measured += (k ? ", " : "") + cases[k].first + ": D = " + detail::fmt(avg.trace_distance);
                           }
                       });
}

// --------------------------- A3 ----------------------------------------------

struct NoiseMoments {
    cplx mean, mean_sq;
    double mean_abs2;
    double se_mean, se_sq, se_abs2;  // standard errors (complex: of each part, max)
};

inline NoiseMoments noise_moments(const UnravelingSpec& spec, double dt, long n, std::uint64_t seed) {
    NoiseStream rng(seed);
    cplx s1 = 0.0, s2 = 0.0;
    double sa = 0.0;
    double v1r = 0.0, v1i = 0.0, v2r = 0.0, v2i = 0.0, va = 0.0;
    for (long k = 0; k < n; ++k) {
        const cplx x = sample_increment(spec, dt, rng).dxi;
        const cplx x2 = x * x;
        const double a = std::norm(x);
        s1 += x;
        s2 += x2;
        sa += a;
        v1r += x.real() * x.real();
        v1i += x.imag() * x.imag();
        v2r += x2.real() * x2.real();
        v2i += x2.imag() * x2.imag();
        va += a * a;
    }
    const double dn = static_cast<double>(n);
    NoiseMoments m;
    m.mean = s1 / dn;
    m.mean_sq = s2 / dn;
    m.mean_abs2 = sa / dn;
    auto se = [&](double sumsq, double mean) { return std::sqrt(std::max(0.0, sumsq / dn - mean * mean) / dn); };
    m.se_mean = std::max(se(v1r, m.mean.real()), se(v1i, m.mean.imag()));
    m.se_sq = std::max(se(v2r, m.mean_sq.real()), se(v2i, m.mean_sq.imag()));
    m.se_abs2 = se(va, m.mean_abs2);
    return m;
}

inline CheckResult check_noise_statistics(long samples = 1000000) {
    return timed_check("A3", "noise moments E[dxi]=0, E[dxi dxi*]=dt, E[dxi dxi]=u dt within 4 standard errors (5 random u)", [&](CheckResult& r) {
        NoiseStream pick(303);
        const double dt = 1e-3;
        r.passed = true;
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            const UnravelingSpec spec{pick.uniform(), 2.0 * pi * pick.uniform()};
            const auto m = noise_moments(spec, dt, samples, derive_seed(303, {static_cast<std::uint64_t>(k)}));
            const cplx u_dt = spec.u() * dt;
            const double z1 = std::max(std::abs(m.mean.real()), std::abs(m.mean.imag())) / m.se_mean;
            const double z2 = std::max(std::abs(m.mean_sq.real() - u_dt.real()), std::abs(m.mean_sq.imag() - u_dt.imag())) / m.se_sq;
            const double z3 = std::abs(m.mean_abs2 - dt) / m.se_abs2;
            worst = std::max({worst, z1, z2, z3});
        }
        r.passed = worst < 4.0;
        r.measured = "largest deviation " + detail::fmt(worst, 3) + " standard errors over 5 x " + std::to_string(samples) + " samples";
    });
}

// --------------------------- A4 ----------------------------------------------

inline CheckResult check_attractor_overlay(int points = 200, int transient = 20) {
    return timed_check("A4", "quantum Poincare section (beta=0.3, N=65, phi=pi) inside the classical attractor box inflated by 50%", [&](CheckResult& r) {
        SimParams p;  // beta 0.3, N 65, phi pi
        const auto classical = to_phase_points(classical_poincare(p, 2000, 100, {0.0, 0.0, 0.0}));
        const BoundingBox box = BoundingBox::of(classical).inflated(1.5);
        const double dt = default_quantum_dt(p.omega);
        const long steps = std::lround((transient + points) * p.drive_period() / dt);
        const NoisePath noise = NoisePath::generate(unraveling_of(p), dt, static_cast<std::size_t>(steps), 404);
        SamplingPlan plan;
        plan.sample_every = std::lround(p.drive_period() / dt);
        const auto rec = evolve_trajectory(p, coherent_state(0.0, p.basis_size), static_cast<double>(steps) * dt, noise, plan);
        const auto section = poincare_section(rec, p.omega, transient + points);
        int inside = 0;
        for (int k = transient; k < transient + points; ++k) inside += box.contains(section[static_cast<std::size_t>(k)]) ? 1 : 0;
        r.passed = inside == points;
        r.measured = std::to_string(inside) + "/" + std::to_string(points) + " points inside q in [" + detail::fmt(box.q_min, 3) + ", " +
                     detail::fmt(box.q_max, 3) + "], p in [" + detail::fmt(box.p_min, 3) + ", " + detail::fmt(box.p_max, 3) + "]";
    });
}

// --------------------------- A5 / A6 / A7 ------------------------------------

inline ExperimentConfig smoke_phi_config(std::vector<double> phis, int jobs) {
    ExperimentConfig c = default_config(Profile::Smoke);
    c.scenario = "acceptance";
    c.params.beta = 0.3;
    c.betas = {0.3};
    c.phis = std::move(phis);
    c.master_seed = 505;
    c.jobs = jobs;
    return c;
}

inline const SweepRow& row_at(const std::vector<SweepRow>& rows, double phi) {
    for (const auto& r : rows)
        if (std::abs(r.phi - phi) < 1e-12) return r;
    throw std::invalid_argument("row_at: phi not in table");
}

inline CheckResult check_headline(const std::vector<SweepRow>& rows) {
    return timed_check("A5", "lambda(pi) - lambda(pi/2) > 2 combined SEM and lambda(pi) > 0 (beta=0.3, N=65, smoke profile)", [&](CheckResult& r) {
        const auto& a = row_at(rows, pi);
        const auto& b = row_at(rows, pi / 2);
        const double diff = a.lambda_mean - b.lambda_mean;
        const double comb = std::hypot(a.sem, b.sem);
        r.passed = diff > 2.0 * comb && a.lambda_mean > 0.0;
        r.measured = "lambda(pi) = " + detail::pm(a.lambda_mean, a.sem) + " (n=" + std::to_string(a.n) + "), lambda(pi/2) = " +
                     detail::pm(b.lambda_mean, b.sem) + " (n=" + std::to_string(b.n) + "), difference = " + detail::fmt(diff, 3) +
                     ", 2 combined SEM = " + detail::fmt(2.0 * comb, 3);
    });
}

inline CheckResult check_anticorrelation(const std::vector<SweepRow>& rows) {
    return timed_check("A6", "Pearson correlation of lambda and windowed delta over 5 phases is negative", [&](CheckResult& r) {
        const double rho = lambda_delta_correlation(rows);
        r.passed = rho < 0.0;
        std::string table;
        for (const auto& row : rows)
            table += (table.empty() ? "" : "; ") + ("phi=" + detail::fmt(row.phi, 3) + ": lambda " + detail::fmt(row.lambda_mean, 3) + ", delta " +
                                                     detail::fmt(row.delta_mean, 3));
        r.measured = "r = " + detail::fmt(rho, 3) + " [" + table + "]";
    });
}

inline CheckResult check_protocol_robustness(const SweepRow& quantum_baseline, const ExperimentConfig& quantum_config, int jobs = 1) {
    return timed_check("A7", "d0 x2 and x0.5 change classical lambda by < 0.01 and quantum lambda(beta=0.3, phi=pi) by < 1 SEM", [&](CheckResult& r) {
        auto proto = classical_anchor_protocol();
        const double base = classical_lyapunov(0.10, proto, 101, jobs).lambda_mean;
        double worst_classical = 0.0;
        for (double d0 : {2e-3, 5e-4}) {
            proto.d0 = d0;
            worst_classical = std::max(worst_classical, std::abs(classical_lyapunov(0.10, proto, 101, jobs).lambda_mean - base));
        }
        double worst_quantum = 0.0;
        std::string qtext;
        for (double d0 : {2e-3, 5e-4}) {
            ExperimentConfig c = quantum_config;
            c.protocol.d0 = d0;
            const auto rows = run_sweep(c, {{ProcessKind::Quantum, pi, 0.3}}, false);
            worst_quantum = std::max(worst_quantum, std::abs(rows.front().lambda_mean - quantum_baseline.lambda_mean));
            qtext += ", d0=" + detail::fmt(d0, 2) + ": " + detail::pm(rows.front().lambda_mean, rows.front().sem);
        }
        r.passed = worst_classical < 0.01 && worst_quantum < quantum_baseline.sem;
        r.measured = "classical max shift " + detail::fmt(worst_classical, 3) + "; quantum baseline " +
                     detail::pm(quantum_baseline.lambda_mean, quantum_baseline.sem) + qtext + ", max shift " + detail::fmt(worst_quantum, 3);
    });
}

// --------------------------- A8 ----------------------------------------------

inline CheckResult check_wigner_oracles() {
    return timed_check("A8", "Wigner negativity: coherent < 1e-3, Fock-1 = 0.4261 +- 1%, cat within 1% of quadrature oracle", [&](CheckResult& r) {
        const int n = 35;
        const GridSpec grid = negativity_grid(n, 256);
        const double coh = state_negativity(coherent_state(cplx(1.0, 0.5), n), grid);
        const double f1 = state_negativity(fock_state(1, n), grid);
        const cplx alpha(2.0, 0.0);
        const double cat = state_negativity(cat_state(alpha, +1, n), grid);
        const double oracle = cat_negativity_oracle(alpha, +1);
        const double f1_ref = fock1_negativity_exact();
        r.passed = coh < 1e-3 && std::abs(f1 - f1_ref) <= 0.01 * f1_ref && std::abs(cat - oracle) <= 0.01 * oracle;
        r.measured = "coherent " + detail::fmt(coh, 3) + ", Fock-1 " + detail::fmt(f1, 6) + " (exact " + detail::fmt(f1_ref, 6) + "), cat " +
                     detail::fmt(cat, 6) + " (oracle " + detail::fmt(oracle, 6) + ")";
    });
}

// --------------------------- A9 ----------------------------------------------

inline CheckResult check_cat_alignment(int jobs = 1) {
    return timed_check("A9", "cat |alpha|=2, Gamma=0.1: delta decays faster for parallel than perpendicular monitoring; model weights frozen when perpendicular",
                       [&](CheckResult& r) {
                           ExperimentConfig c = default_config(Profile::Smoke);
                           c.scenario = "acceptance-cat";
                           c.master_seed = 909;
                           c.jobs = jobs;
                           c.cat.alpha_abs = 2.0;
                           c.cat.varphi = 0.0;
                           c.cat.gamma = 0.1;
                           c.cat.n_realizations = 20;
                           c.cat.phis = {0.0, pi / 2};
                           const auto res = run_cat_fringe_experiment(c, false);
                           const auto& par = res.rows[0];
                           const auto& perp = res.rows[1];
                           r.passed = par.rate > perp.rate && perp.model_weight_drift < 1e-9 && par.model_rate > perp.model_rate;
                           r.measured = "full-state rate parallel " + detail::fmt(par.rate, 4) + " vs perpendicular " + detail::fmt(perp.rate, 4) +
                                        "; model weight drift perpendicular " + detail::fmt(perp.model_weight_drift, 2) + ", model rate parallel " +
                                        detail::fmt(par.model_rate, 4);
                       });
}

// --------------------------- A10 ---------------------------------------------

/// Largest relative mismatch between the zero-variance, zero-noise moment increments and
/// the classical Duffing field, over `n` random states.
inline double semiclassical_reduction_error(int n, std::uint64_t seed) {
    NoiseStream rng(seed);
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        SimParams p;
        p.beta = 0.1 + 0.9 * rng.uniform();
        p.gamma = 0.2 * rng.uniform();
        const double q = 8.0 * (rng.uniform() - 0.5), v = 8.0 * (rng.uniform() - 0.5), t = 10.0 * rng.uniform();
        const GaussianState s{q, v, 0.0, 0.0, 0.0, t};
        const double dt = 1e-3;
        const auto inc = gaussian_moment_rhs(s, p, unraveling_of(p), t, dt, 0.0);
        const auto cl = duffing_rhs({q, v, t}, p);
        const double scale = std::max({1.0, std::abs(cl.dx), std::abs(cl.dv)});
        worst = std::max({worst, std::abs(inc.dq / dt - cl.dx) / scale, std::abs(inc.dp / dt - cl.dv) / scale});
    }
    return worst;
}

struct ShortTimeAgreement {
    double worst_ratio{0.0};  // max |sc - sse| / (0.05 max(|sse|, 0.5)); < 1 passes
    double worst_abs{0.0};
};

/// One drive period from a coherent state at (q0, 0): Gaussian closure vs full SSE on the same noise.
inline ShortTimeAgreement semiclassical_short_time(double beta, int basis_size, double q0, std::uint64_t seed) {
    SimParams p;
    p.beta = beta;
    p.basis_size = basis_size;
    const double dt = default_quantum_dt(p.omega);
    const long steps = std::lround(p.drive_period() / dt);
    const NoisePath noise = NoisePath::generate(unraveling_of(p), dt, static_cast<std::size_t>(steps), seed);
    SamplingPlan plan;
    plan.sample_every = 100;
    const auto rec = evolve_trajectory(p, coherent_state(cplx(q0 / std::sqrt(2.0), 0.0), basis_size), static_cast<double>(steps) * dt, noise, plan);
    const auto sc = evolve_semiclassical(p, GaussianState::coherent(q0, 0.0), noise, steps, 100);
    ShortTimeAgreement out;
    for (std::size_t k = 0; k < rec.size() && k < sc.size(); ++k) {
        for (auto [a, b] : {std::pair{sc[k].q, rec.q_means[k]}, std::pair{sc[k].p, rec.p_means[k]}}) {
            out.worst_abs = std::max(out.worst_abs, std::abs(a - b));
            out.worst_ratio = std::max(out.worst_ratio, std::abs(a - b) / (0.05 * std::max(std::abs(b), 0.5)));
        }
    }
    return out;
}

inline ExperimentConfig semiclassical_phase_config(double gamma, int jobs) {
    ExperimentConfig c = default_config(Profile::Paper);
    c.scenario = "acceptance-semiclassical";
    c.params.gamma = gamma;
    c.params.beta = 0.3;
    c.betas = {0.3};
    c.phis = {pi / 2, pi};
    c.protocol.total_cycles = 300;
    c.protocol.n_realizations = 20;
    c.master_seed = 1010;
    c.jobs = jobs;
    return c;
}

inline std::vector<SweepRow> semiclassical_phase_rows(double gamma, int jobs) {
    const auto c = semiclassical_phase_config(gamma, jobs);
    return run_sweep(c, {{ProcessKind::Semiclassical, pi / 2, 0.3}, {ProcessKind::Semiclassical, pi, 0.3}}, false);
}

inline CheckResult check_semiclassical_gates(const std::vector<SweepRow>& low_gamma, const std::vector<SweepRow>& high_gamma) {
    return timed_check("A10", "Gaussian closure: classical reduction, one-period agreement with SSE at beta=0.1 (5%), phi-dependence at Gamma=0.05 only",
                       [&](CheckResult& r) {
                           const double red = semiclassical_reduction_error(100, 1001);
                           const auto st = semiclassical_short_time(0.1, 200, 10.0, 1002);
                           auto gap = [](const std::vector<SweepRow>& rows) {
                               return std::pair{std::abs(rows[0].lambda_mean - rows[1].lambda_mean), 2.0 * std::hypot(rows[0].sem, rows[1].sem)};
                           };
                           const auto [g05, s05] = gap(low_gamma);
                           const auto [g10, s10] = gap(high_gamma);
                           r.passed = red < 1e-12 && st.worst_ratio < 1.0 && g05 > s05 && g10 <= s10;
                           r.measured = "reduction error " + detail::fmt(red, 2) + "; short-time worst error " + detail::fmt(st.worst_abs, 3) +
                                        " (" + detail::fmt(100.0 * 0.05 * st.worst_ratio, 3) + "% of scale)" + "; Gamma=0.05: lambda(pi/2) " +
                                        detail::pm(low_gamma[0].lambda_mean, low_gamma[0].sem) + ", lambda(pi) " +
                                        detail::pm(low_gamma[1].lambda_mean, low_gamma[1].sem) + " (gap " + detail::fmt(g05, 3) + " vs 2 SEM " +
                                        detail::fmt(s05, 3) + "); Gamma=0.10: lambda(pi/2) " + detail::pm(high_gamma[0].lambda_mean, high_gamma[0].sem) +
                                        ", lambda(pi) " + detail::pm(high_gamma[1].lambda_mean, high_gamma[1].sem) + " (gap " + detail::fmt(g10, 3) +
                                        " vs 2 SEM " + detail::fmt(s10, 3) + ")";
                       });
}

// --------------------------- A11 ---------------------------------------------

inline CheckResult check_regime_residence(const std::vector<SweepRow>& low_gamma, int jobs = 1) {
    return timed_check("A11", "Gamma=0.05: more time near the classical periodic orbit at the minimum-lambda phase than at the maximum-lambda phase",
                       [&](CheckResult& r) {
                           ExperimentConfig c = semiclassical_phase_config(0.05, jobs);
                           c.scenario = "acceptance-residence";
                           c.protocol.n_realizations = 10;
                           const auto rows = run_residence(c, false);
                           const bool first_min = low_gamma[0].lambda_mean < low_gamma[1].lambda_mean;
                           const double phi_min = first_min ? low_gamma[0].phi : low_gamma[1].phi;
                           const double phi_max = first_min ? low_gamma[1].phi : low_gamma[0].phi;
                           double f_min = 0, f_max = 0, e_min = 0, e_max = 0;
                           for (const auto& row : rows) {
                               if (std::abs(row.phi - phi_min) < 1e-12) f_min = row.frac_periodic, e_min = row.frac_periodic_sem;
                               if (std::abs(row.phi - phi_max) < 1e-12) f_max = row.frac_periodic, e_max = row.frac_periodic_sem;
                           }
                           r.passed = f_min > f_max;
                           r.measured = "min-lambda phase " + detail::fmt(phi_min, 4) + ": near-orbit fraction " + detail::pm(f_min, e_min) +
                                        "; max-lambda phase " + detail::fmt(phi_max, 4) + ": " + detail::pm(f_max, e_max) + " (tube radius " +
                                        detail::fmt(rows.front().tube_radius, 3) + ")";
                       });
}

}  // namespace mqc
