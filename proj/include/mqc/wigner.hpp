// wigner.hpp — Wigner functions of pure states, negativity and its decay under monitoring
//
// W(q, p) = (1/pi) \int psi(q + y) psi*(q - y) e^{-2ipy} dy, evaluated by trapezoid
// quadrature in y on a position grid fine enough to resolve the state's bandwidth.

#pragma once

#include "mqc/core.hpp"
#include "mqc/fock.hpp"
#include "mqc/noise.hpp"
#include "mqc/sse.hpp"
#include "mqc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqc {

class GridTooSmallError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GridSpec {
    double q_min{-10.0};
    double q_max{10.0};
    double p_min{-10.0};
    double p_max{10.0};
    int n_q{256};
    int n_p{256};

    double dq() const { return (q_max - q_min) / static_cast<double>(n_q - 1); }
    double dp() const { return (p_max - p_min) / static_cast<double>(n_p - 1); }
    double q(int i) const { return q_min + i * dq(); }
    double p(int j) const { return p_min + j * dp(); }

    void validate() const {
        if (n_q < 2 || n_p < 2) throw std::invalid_argument("GridSpec: need at least 2 points per axis");
        if (!(q_max > q_min) || !(p_max > p_min)) throw std::invalid_argument("GridSpec: empty extent");
    }
};

// Extent +-(sqrt(2N) + 3) on both axes.
inline GridSpec default_grid(int basis_size, int points = 256) {
    const double r = std::sqrt(2.0 * basis_size) + 3.0;
    return {-r, r, -r, r, points, points};
}

struct WignerGrid {
    GridSpec spec;
    RealMatrix values;  // values(j, i) = W(q_i, p_j): n_p rows, n_q columns

    double integral() const { return values.sum() * spec.dq() * spec.dp(); }
    double abs_integral() const { return values.cwiseAbs().sum() * spec.dq() * spec.dp(); }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("WignerGrid: cannot open " + path);
        out << std::setprecision(17) << spec.q_min << ' ' << spec.q_max << ' ' << spec.p_min << ' ' << spec.p_max << ' ' << spec.n_q << ' '
            << spec.n_p << '\n';
        for (Eigen::Index j = 0; j < values.rows(); ++j) {
            for (Eigen::Index i = 0; i < values.cols(); ++i) {
                if (i) out << ' ';
                out << values(j, i);
            }
            out << '\n';
        }
    }
};

// --------------------------- Wavefunctions -----------------------------------

// Hermite functions phi_0..phi_{n-1} at x by the normalized three-term recurrence.
inline void hermite_functions(double x, int n, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(n), 0.0);
    out[0] = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    if (n > 1) out[1] = std::sqrt(2.0) * x * out[0];
    for (int k = 1; k + 1 < n; ++k)
        out[static_cast<std::size_t>(k + 1)] = std::sqrt(2.0 / (k + 1)) * x * out[static_cast<std::size_t>(k)] -
                                               std::sqrt(static_cast<double>(k) / (k + 1)) * out[static_cast<std::size_t>(k - 1)];
}

/// <x|psi> at each x (position representation).
inline Vector wavefunction(const StateVector& s, std::span<const double> xs) {
    Vector psi(static_cast<Eigen::Index>(xs.size()));
    std::vector<double> h;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        hermite_functions(xs[j], s.size(), h);
        cplx acc = 0.0;
        for (int k = 0; k < s.size(); ++k) acc += s.amps(k) * h[static_cast<std::size_t>(k)];
        psi(static_cast<Eigen::Index>(j)) = acc;
    }
    return psi;
}

/// <p|psi>: the Fock states carry a factor (-i)^n in momentum space.
inline Vector momentum_wavefunction(const StateVector& s, std::span<const double> ps) {
    StateVector rotated = s;
    cplx ph = 1.0;
    for (int k = 0; k < s.size(); ++k) {
        rotated.amps(k) *= ph;
        ph *= -I;
    }
    return wavefunction(rotated, ps);
}

// Probability of the position and momentum marginals outside the grid extents.
inline double grid_tail_mass(const StateVector& s, const GridSpec& spec) {
    const double reach = std::sqrt(2.0 * s.size() + 1.0) + 12.0;
    const double h = 0.02;
    auto outside_mass = [&](bool momentum, double lo, double hi) {
        const double a = std::min(lo, -reach), b = std::max(hi, reach);
        std::vector<double> xs;
        for (double x = a; x <= b; x += h)
            if (x < lo || x > hi) xs.push_back(x);
        if (xs.empty()) return 0.0;
        const Vector w = momentum ? momentum_wavefunction(s, xs) : wavefunction(s, xs);
        return w.squaredNorm() * h;
    };
    return outside_mass(false, spec.q_min, spec.q_max) + outside_mass(true, spec.p_min, spec.p_max);
}

inline constexpr double kGridTailLimit = 1e-4;
inline constexpr double kNormalizationTolerance = 2e-2;

// --------------------------- Transform ---------------------------------------

inline WignerGrid wigner_transform(const StateVector& state, const GridSpec& spec, bool check_tail = true) {
    spec.validate();
    const double nrm = state.norm_squared();
    if (std::abs(nrm - 1.0) > 1e-8) throw std::invalid_argument("wigner_transform: state not normalized");
    if (check_tail) {
        const double tail = grid_tail_mass(state, spec);
        if (tail > kGridTailLimit)
            throw GridTooSmallError("wigner_transform: grid too small for the state (mass outside extents " + std::to_string(tail) + ")");
    }

    // y-spacing must resolve the integrand bandwidth 2(p_state + |p|).
    const double p_state = std::sqrt(2.0 * state.size() + 1.0);
    const double p_grid = std::max(std::abs(spec.p_min), std::abs(spec.p_max));
    const double s_max = pi / (2.0 * (p_state + p_grid));
    const int m = std::max(1, static_cast<int>(std::ceil(spec.dq() / s_max)));
    const double s = spec.dq() / m;
    const int n_aux = m * (spec.n_q - 1) + 1;
    std::vector<double> xs(static_cast<std::size_t>(n_aux));
    for (int j = 0; j < n_aux; ++j) xs[static_cast<std::size_t>(j)] = spec.q_min + j * s;
    const Vector psi = wavefunction(state, xs);

    const int k_count = (n_aux - 1) / 2 + 1;
    RealMatrix fr = RealMatrix::Zero(spec.n_q, k_count);
    RealMatrix fi = RealMatrix::Zero(spec.n_q, k_count);
    for (int i = 0; i < spec.n_q; ++i) {
        const int c = m * i;
        const int kmax = std::min(c, n_aux - 1 - c);
        for (int k = 0; k <= kmax && k < k_count; ++k) {
            const cplx f = psi(c + k) * std::conj(psi(c - k));
            fr(i, k) = f.real();
            fi(i, k) = f.imag();
        }
    }
    RealMatrix cs(spec.n_p, k_count), sn(spec.n_p, k_count);
    for (int j = 0; j < spec.n_p; ++j) {
        const double pj = spec.p(j);
        for (int k = 0; k < k_count; ++k) {
            const double w = k == 0 ? 1.0 : 2.0;
            const double th = 2.0 * pj * k * s;
            cs(j, k) = w * std::cos(th);
            sn(j, k) = w * std::sin(th);
        }
    }
    WignerGrid g;
    g.spec = spec;
    g.values = (s / pi) * (cs * fr.transpose() + sn * fi.transpose());
    return g;
}

inline WignerGrid wigner_transform(const StateVector& state) { return wigner_transform(state, default_grid(state.size())); }

/// delta = sum |W| dq dp - 1, clamped at 0.
inline double negativity(const WignerGrid& grid) {
    const double norm = grid.integral();
    if (std::abs(norm - 1.0) > kNormalizationTolerance)
        throw std::invalid_argument("negativity: Wigner grid not normalized (integral " + std::to_string(norm) + ")");
    return std::max(0.0, grid.abs_integral() - 1.0);
}

inline double state_negativity(const StateVector& s, const GridSpec& spec) { return negativity(wigner_transform(s, spec)); }

// --------------------------- Averages ----------------------------------------

struct DeltaSeries {
    std::vector<double> t;
    std::vector<double> delta;
};

struct MeanWithError {
    double mean{0.0};
    double sem{0.0};
    int n{0};
};

/// Time average over [t_begin, t_end] per trajectory, then mean and SEM over trajectories.
inline MeanWithError negativity_time_average(std::span<const DeltaSeries> series, double t_begin, double t_end) {
    if (series.empty()) throw std::invalid_argument("negativity_time_average: no trajectories");
    if (!(t_end >= t_begin)) throw std::invalid_argument("negativity_time_average: empty window");
    std::vector<double> per;
    const double tol = 1e-9 * std::max(1.0, std::abs(t_end));
    for (const auto& s : series) {
        if (s.t.empty() || s.t.front() > t_begin + tol || s.t.back() < t_end - tol)
            throw std::invalid_argument("negativity_time_average: window outside series");
        double acc = 0.0;
        int cnt = 0;
        for (std::size_t k = 0; k < s.t.size(); ++k) {
            if (s.t[k] >= t_begin - tol && s.t[k] <= t_end + tol) {
                acc += s.delta[k];
                ++cnt;
            }
        }
        if (cnt == 0) throw std::invalid_argument("negativity_time_average: no samples in window");
        per.push_back(acc / cnt);
    }
    return {stats::mean(per), stats::sem(per), static_cast<int>(per.size())};
}

// Ensemble mean and SEM of delta at each common sample instant.
struct DeltaBand {
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> sem;
};

inline DeltaBand ensemble_band(std::span<const DeltaSeries> series) {
    if (series.empty()) throw std::invalid_argument("ensemble_band: no trajectories");
    DeltaBand b;
    b.t = series.front().t;
    for (std::size_t k = 0; k < b.t.size(); ++k) {
        std::vector<double> v;
        for (const auto& s : series) {
            if (s.delta.size() != b.t.size()) throw std::invalid_argument("ensemble_band: series lengths differ");
            v.push_back(s.delta[k]);
        }
        b.mean.push_back(stats::mean(v));
        b.sem.push_back(stats::sem(v));
    }
    return b;
}

// --------------------------- Decay rates under monitoring only ---------------

struct DecayOptions {
    double sample_dt{0.05};
    double dt{0.0};  // 0 selects default_quantum_dt
    GridSpec grid;
    std::uint64_t seed{1};
};

struct DecayRate {
    double phi{0.0};
    double rate{0.0};
    double residual{0.0};
    int fit_points{0};
    DeltaBand band;
};

/// Fits log delta(t) = a - rate t from t = 0 until delta first falls below max(delta0/e^2, 0.02).
inline stats::LineFit fit_decay(const DeltaBand& band, int* used = nullptr) {
    if (band.t.size() < 2) throw std::invalid_argument("fit_decay: need at least two samples");
    const double d0 = band.mean.front();
    if (!(d0 > 0.0)) throw std::invalid_argument("fit_decay: non-positive initial negativity");
    const double floor = std::max(d0 / std::exp(2.0), 0.02);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < band.t.size(); ++k) {
        if (band.mean[k] < floor || !(band.mean[k] > 0.0)) break;
        xs.push_back(band.t[k]);
        ys.push_back(std::log(band.mean[k]));
    }
    if (xs.size() < 3) {
        // Decay faster than the sampling: fall back to the first two points.
        xs.assign(band.t.begin(), band.t.begin() + 2);
        ys = {std::log(band.mean[0]), std::log(std::max(band.mean[1], 1e-12))};
    }
    if (used) *used = static_cast<int>(xs.size());
    return stats::fit_line(xs, ys);
}

/// Negativity decay rate for each monitoring phase, with the Hamiltonian switched off.
inline std::vector<DecayRate> negativity_decay_rate(const StateVector& initial, const SimParams& params, std::span<const double> phis,
                                                    double duration, int n_realizations, const DecayOptions& opt) {
    if (n_realizations < 1) throw std::invalid_argument("negativity_decay_rate: need at least one realization");
    const double delta0 = state_negativity(initial, opt.grid);
    if (!(delta0 > 0.05)) throw std::invalid_argument("negativity_decay_rate: initial state has no negativity to fit");
    SimParams p = params;
    p.basis_size = initial.size();
    auto ops = std::make_shared<const OperatorSet>(build_operators(p).without_hamiltonian());
    const double dt = opt.dt > 0.0 ? opt.dt : default_quantum_dt(params.omega);
    const long sample_every = std::max(1L, std::lround(opt.sample_dt / dt));
    const long steps = std::lround(duration / dt);

    std::vector<DecayRate> out;
    for (double phi : phis) {
        const UnravelingSpec spec{p.u_abs, phi};
        std::vector<DeltaSeries> series;
        for (int r = 0; r < n_realizations; ++r) {
            const auto seed = derive_seed(opt.seed, {hash_string("decay"), hash_double(phi), static_cast<std::uint64_t>(r)});
            const NoisePath noise = NoisePath::generate(spec, dt, static_cast<std::size_t>(steps), seed);
            SamplingPlan plan;
            plan.sample_every = sample_every;
            for (long k = 0; k <= steps; k += sample_every) plan.snapshot_steps.push_back(k);
            const TrajectoryRecord rec = evolve_trajectory(ops, spec, initial, static_cast<double>(steps) * dt, noise, plan);
            DeltaSeries ds;
            for (const auto& snap : rec.states) {
                ds.t.push_back(snap.t);
                ds.delta.push_back(state_negativity(snap.state, opt.grid));
            }
            series.push_back(std::move(ds));
        }
        DecayRate row;
        row.phi = phi;
        row.band = ensemble_band(series);
        const auto fit = fit_decay(row.band, &row.fit_points);
        row.rate = std::max(0.0, -fit.slope);
        row.residual = fit.rms_residual;
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace mqc
