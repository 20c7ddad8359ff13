// semiclassical.hpp — Gaussian (second-cumulant) closure of the monitored dynamics
//
// Means and symmetrized covariances of Q and P evolve by the Ito expansion of
// d<A> for A in {Q, P, Q^2, P^2, (QP + PQ)/2} under the diffusive stochastic
// Schrödinger equation, with third and higher cumulants set to zero. For
// L = sqrt(Gamma)(Q + iP) the noise enters only the means:
//
//   dq = p dt + 2 Re[C_q dxi],             C_q = sqrt(Gamma) (vqq - 1/2 + i vqp)
//   dp = F dt + 2 Re[C_p dxi],             C_p = sqrt(Gamma) (vqp + i (vpp - 1/2))
//   F  = -beta^2 (q^3 + 3 q vqq) + q + (g/beta) cos(Omega t) - 2 Gamma p
//
// and the covariances follow a deterministic Riccati flow in which
//   M_xy = 2 Re(C_x C_y^*) + 2 Re(C_x C_y u)
// is the measurement-induced contraction (the Ito term dx dy).

#pragma once

#include "mqc/classical.hpp"
#include "mqc/core.hpp"
#include "mqc/noise.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqc {

struct GaussianState {
    double q{0.0};
    double p{0.0};
    double vqq{0.5};
    double vpp{0.5};
    double vqp{0.0};
    double t{0.0};

    double det() const { return vqq * vpp - vqp * vqp; }

    static GaussianState coherent(double q, double p, double t = 0.0) { return {q, p, 0.5, 0.5, 0.0, t}; }
};

struct GaussianIncrement {
    double dq{0.0};
    double dp{0.0};
    double dvqq{0.0};
    double dvpp{0.0};
    double dvqp{0.0};
};

inline constexpr double kHeisenbergTolerance = 1e-6;
inline constexpr double kPositivityRepair = 1e-8;

struct MeasurementCoefficients {
    cplx cq;
    cplx cp;
};

inline MeasurementCoefficients measurement_coefficients(const GaussianState& s, double gamma) {
    const double sg = std::sqrt(gamma);
    return {sg * cplx(s.vqq - 0.5, s.vqp), sg * cplx(s.vqp, s.vpp - 0.5)};
}

/// Increment of (q, p, vqq, vpp, vqp) over dt for noise increment dxi.
inline GaussianIncrement gaussian_moment_rhs(const GaussianState& s, const SimParams& par, const UnravelingSpec& spec, double t, double dt,
                                             cplx dxi) {
    const double b2 = par.beta * par.beta;
    const double gam = par.gamma;
    const double f = (par.g / par.beta) * std::cos(par.omega * t);
    const auto [cq, cp] = measurement_coefficients(s, gam);
    const cplx u = spec.u();
    auto ito = [&](cplx cx, cplx cy) { return 2.0 * (cx * std::conj(cy)).real() + 2.0 * (cx * cy * u).real(); };

    const double q3 = s.q * s.q * s.q + 3.0 * s.q * s.vqq;  // <Q^3> under the closure
    GaussianIncrement d;
    d.dq = s.p * dt + 2.0 * (cq * dxi).real();
    d.dp = (-b2 * q3 + s.q + f - 2.0 * gam * s.p) * dt + 2.0 * (cp * dxi).real();
    d.dvqq = (2.0 * s.vqp + gam - ito(cq, cq)) * dt;
    d.dvpp = (-6.0 * b2 * (s.q * s.q + s.vqq) * s.vqp + 2.0 * s.vqp - 4.0 * gam * s.vpp + gam - ito(cp, cp)) * dt;
    d.dvqp = (s.vpp + s.vqq - 3.0 * b2 * s.vqq * (s.q * s.q + s.vqq) - 2.0 * gam * s.vqp - ito(cq, cp)) * dt;
    return d;
}

/// Enforces covariance positivity (small violations floored, large ones abort) and the
/// pure-state Heisenberg floor det = 1/4 (covariance rescaled up when it drifts below).
inline void repair_covariance(GaussianState& s) {
    if (!std::isfinite(s.q) || !std::isfinite(s.p) || !std::isfinite(s.vqq) || !std::isfinite(s.vpp) || !std::isfinite(s.vqp))
        throw SimulationError("semiclassical: non-finite moments at t = " + std::to_string(s.t));
    const double tr = s.vqq + s.vpp;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (s.vqq - s.vpp) * (s.vqq - s.vpp) + s.vqp * s.vqp));
    const double lmin = 0.5 * tr - disc;
    if (lmin <= 0.0) {
        if (lmin < -kPositivityRepair)
            throw SimulationError("semiclassical: covariance lost positivity (min eigenvalue " + std::to_string(lmin) + ") at t = " +
                                  std::to_string(s.t));
        const double lift = kPositivityRepair - lmin;
        s.vqq += lift;
        s.vpp += lift;
    }
    const double det = s.det();
    if (det < 0.25) {
        const double scale = std::sqrt(0.25 / det);
        s.vqq *= scale;
        s.vpp *= scale;
        s.vqp *= scale;
    }
}

/// One Ito step. Means: Euler-Maruyama. Covariance: Lie-Trotter split into the
/// Hamiltonian + damping flow, applied as the congruence V -> Phi V Phi^T + Gamma dt I with
/// Phi = exp(A dt), and the measurement contraction dW = -W R W dt (W = V - I/2), solved
/// exactly as W (I + dt R W)^{-1}. Both maps keep V positive, which plain Euler does not
/// once the ellipse is strongly squeezed and sheared.
inline GaussianState gaussian_step(const GaussianState& s, const SimParams& par, const UnravelingSpec& spec, double dt, cplx dxi) {
    const GaussianIncrement d = gaussian_moment_rhs(s, par, spec, s.t, dt, dxi);
    GaussianState n = s;
    n.q += d.dq;
    n.p += d.dp;
    n.t += dt;

    using M2 = Eigen::Matrix2d;
    const double b2 = par.beta * par.beta;
    M2 a;
    a << 0.0, 1.0, 1.0 - 3.0 * b2 * (s.q * s.q + s.vqq), -2.0 * par.gamma;
    const M2 ah = a * dt;
    M2 phi = M2::Identity(), term = M2::Identity();
    for (int k = 1; k <= 6; ++k) {
        term = term * ah / static_cast<double>(k);
        phi += term;
    }
    M2 v;
    v << s.vqq, s.vqp, s.vqp, s.vpp;
    v = phi * v * phi.transpose() + par.gamma * dt * M2::Identity();

    // R = 2 Gamma Re(w w^H + u w w^T), w = (1, i)
    const Eigen::Vector2cd w(1.0, I);
    const Eigen::Matrix2cd ww = w * w.adjoint() + spec.u() * (w * w.transpose());
    const M2 r = 2.0 * par.gamma * ww.real();
    const M2 wmat = v - 0.5 * M2::Identity();
    M2 wn = wmat * (M2::Identity() + dt * r * wmat).inverse();
    wn = 0.5 * (wn + wn.transpose()).eval();
    n.vqq = wn(0, 0) + 0.5;
    n.vpp = wn(1, 1) + 0.5;
    n.vqp = wn(0, 1);
    repair_covariance(n);
    return n;
}

inline double semiclassical_dt(const SimParams& p) { return p.dt > 0.0 ? p.dt : default_quantum_dt(p.omega); }

/// Euler-Maruyama trajectory on a stored noise path, sampled every `sample_every` steps.
inline std::vector<GaussianState> evolve_semiclassical(const SimParams& par, const GaussianState& initial, const NoisePath& noise,
                                                       long steps, long sample_every = 1) {
    if (static_cast<std::size_t>(steps) > noise.size()) throw std::invalid_argument("evolve_semiclassical: noise path too short");
    if (sample_every < 1) throw std::invalid_argument("evolve_semiclassical: sample_every must be >= 1");
    const UnravelingSpec spec = noise.spec;
    std::vector<GaussianState> out{initial};
    GaussianState s = initial;
    for (long k = 0; k < steps; ++k) {
        s = gaussian_step(s, par, spec, noise.dt, noise[static_cast<std::size_t>(k)].dxi);
        if ((k + 1) % sample_every == 0) out.push_back(s);
    }
    return out;
}

inline void write_semiclassical_csv(const std::string& path, const std::vector<GaussianState>& traj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_semiclassical_csv: cannot open " + path);
    out << "t,q,p,vqq,vpp,vqp\n" << std::setprecision(17);
    for (const auto& s : traj) out << s.t << ',' << s.q << ',' << s.p << ',' << s.vqq << ',' << s.vpp << ',' << s.vqp << '\n';
}

// --------------------------- Lyapunov process adapter ------------------------

class SemiclassicalProcess {
public:
    SemiclassicalProcess(const SimParams& par, const UnravelingSpec& spec, GaussianState initial, double dt)
        : par_(par), spec_(spec), state_(initial), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("SemiclassicalProcess: dt must be > 0");
    }

    double step_size() const { return dt_; }
    double time() const { return state_.t; }
    const GaussianState& state() const { return state_; }

    void advance(const NoiseIncrement& inc) {
        state_ = gaussian_step(state_, par_, spec_, dt_, inc.dxi);
        ++steps_;
        state_.t = t0_ + static_cast<double>(steps_) * dt_;
    }

    PhasePoint phase_point() const { return {state_.q, state_.p}; }

    void displace(double dq, double dp) {
        state_.q += dq;
        state_.p += dp;
    }

private:
    SimParams par_;
    UnravelingSpec spec_;
    GaussianState state_;
    double dt_;
    double t0_{state_.t};
    long steps_{0};
};

// --------------------------- Regime residence --------------------------------

struct Residence {
    double frac_periodic{0.0};
    double frac_chaotic{0.0};
    int transitions{0};
    double tube_radius{0.0};
};

inline constexpr double kTubeFraction = 0.15;

/// Classifies each sample as near the periodic orbit (within the tube) or in the
/// central chaotic region. The orbit's mirror image under (q, p) -> (-q, -p), which is
/// also an attractor of the driven equation, counts as the same regime.
inline Residence regime_residence(const std::vector<PhasePoint>& samples, const PeriodicOrbit& orbit, double tube_fraction = kTubeFraction) {
    if (samples.empty()) throw std::invalid_argument("regime_residence: empty trajectory");
    if (orbit.curve.empty()) throw std::invalid_argument("regime_residence: empty orbit");
    Residence r;
    r.tube_radius = tube_fraction * orbit.rms_radius();
    const double r2 = r.tube_radius * r.tube_radius;
    auto near = [&](const PhasePoint& x) {
        for (const auto& o : orbit.curve) {
            const double a = (x.q - o.q) * (x.q - o.q) + (x.p - o.p) * (x.p - o.p);
            const double b = (x.q + o.q) * (x.q + o.q) + (x.p + o.p) * (x.p + o.p);
            if (a <= r2 || b <= r2) return true;
        }
        return false;
    };
    int periodic = 0;
    bool prev = false;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const bool cur = near(samples[k]);
        if (cur) ++periodic;
        if (k > 0 && cur != prev) ++r.transitions;
        prev = cur;
    }
    r.frac_periodic = static_cast<double>(periodic) / static_cast<double>(samples.size());
    r.frac_chaotic = 1.0 - r.frac_periodic;
    return r;
}

inline Residence regime_residence(const std::vector<GaussianState>& traj, const SimParams& par, int transient_cycles = 200) {
    const auto orbit = find_periodic_orbit(par, transient_cycles);
    if (!orbit) throw std::invalid_argument("regime_residence: classical motion is not periodic for these parameters");
    std::vector<PhasePoint> pts;
    pts.reserve(traj.size());
    for (const auto& s : traj) pts.push_back({s.q, s.p});
    return regime_residence(pts, *orbit);
}

}  // namespace mqc
