// classical.hpp — the driven dissipative Duffing oscillator
//
//   x'' + 2 Gamma x' + beta^2 x^3 - x = (g / beta) cos(Omega t)
//
// (x, x') is directly comparable with (<Q>, <P>) of the quantum model.

#pragma once

#include "mqc/core.hpp"
#include "mqc/noise.hpp"

#include <cmath>
#include <concepts>
#include <fstream>
#include <iomanip>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mqc {

struct ClassicalState {
    double x{0.0};
    double v{0.0};
    double t{0.0};

    bool finite() const { return std::isfinite(x) && std::isfinite(v) && std::isfinite(t); }
};

struct ClassicalDerivative {
    double dx{0.0};
    double dv{0.0};
};

inline ClassicalDerivative duffing_rhs(const ClassicalState& s, const SimParams& p) {
    const double b2 = p.beta * p.beta;
    return {s.v, -2.0 * p.gamma * s.v - b2 * s.x * s.x * s.x + s.x + (p.g / p.beta) * std::cos(p.omega * s.t)};
}

inline double duffing_energy(const ClassicalState& s, const SimParams& p) {
    const double b2 = p.beta * p.beta;
    return 0.5 * s.v * s.v + 0.25 * b2 * s.x * s.x * s.x * s.x - 0.5 * s.x * s.x;
}

// Classical fourth-order Runge-Kutta step for any (state) -> derivative field.
template <class Rhs>
    requires std::invocable<Rhs&, const ClassicalState&>
ClassicalState rk4_step(const ClassicalState& s, Rhs&& rhs, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
    auto shifted = [&](const ClassicalDerivative& k, double h) { return ClassicalState{s.x + h * k.dx, s.v + h * k.dv, s.t + h}; };
    const ClassicalDerivative k1 = rhs(s);
    const ClassicalDerivative k2 = rhs(shifted(k1, 0.5 * dt));
    const ClassicalDerivative k3 = rhs(shifted(k2, 0.5 * dt));
    const ClassicalDerivative k4 = rhs(shifted(k3, dt));
    ClassicalState out{s.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
                       s.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv), s.t + dt};
    if (!out.finite()) throw SimulationError("rk4_step: non-finite state at t = " + std::to_string(out.t));
    return out;
}

inline ClassicalState rk4_step(const ClassicalState& s, const SimParams& p, double dt) {
    return rk4_step(s, [&p](const ClassicalState& st) { return duffing_rhs(st, p); }, dt);
}

inline double classical_dt(const SimParams& p) { return p.dt > 0.0 ? p.dt : default_classical_dt(p.omega); }

// Advances a whole number of drive periods with an integer number of steps per period.
inline ClassicalState advance_periods(ClassicalState s, const SimParams& p, long periods, long steps_per) {
    const double h = p.drive_period() / static_cast<double>(steps_per);
    for (long c = 0; c < periods; ++c) {
        const double t_start = s.t;
        for (long k = 0; k < steps_per; ++k) s = rk4_step(s, p, h);
        s.t = t_start + p.drive_period();  // keep stroboscopic instants exact
    }
    return s;
}

/// Stroboscopic samples (x, v) at t = 2 pi n / Omega after the transient.
inline std::vector<ClassicalState> classical_poincare(const SimParams& p, int n_points, int transient_cycles,
                                                      ClassicalState initial = {}) {
    if (n_points < 1) throw std::invalid_argument("classical_poincare: n_points must be >= 1");
    if (transient_cycles < 0) throw std::invalid_argument("classical_poincare: transient_cycles must be >= 0");
    const long steps_per = steps_per_period(p.omega, classical_dt(p));
    ClassicalState s = advance_periods(initial, p, transient_cycles, steps_per);
    std::vector<ClassicalState> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (int n = 0; n < n_points; ++n) {
        s = advance_periods(s, p, 1, steps_per);
        out.push_back(s);
    }
    return out;
}

struct BoundingBox {
    double q_min{0.0}, q_max{0.0}, p_min{0.0}, p_max{0.0};

    static BoundingBox of(const std::vector<PhasePoint>& pts) {
        if (pts.empty()) throw std::invalid_argument("BoundingBox: no points");
        BoundingBox b{pts[0].q, pts[0].q, pts[0].p, pts[0].p};
        for (const auto& pt : pts) {
            b.q_min = std::min(b.q_min, pt.q);
            b.q_max = std::max(b.q_max, pt.q);
            b.p_min = std::min(b.p_min, pt.p);
            b.p_max = std::max(b.p_max, pt.p);
        }
        return b;
    }

    // Scales the half-widths about the centre by `factor`.
    BoundingBox inflated(double factor) const {
        const double cq = 0.5 * (q_min + q_max), cp = 0.5 * (p_min + p_max);
        const double hq = 0.5 * (q_max - q_min) * factor, hp = 0.5 * (p_max - p_min) * factor;
        return {cq - hq, cq + hq, cp - hp, cp + hp};
    }

    bool contains(const PhasePoint& pt) const { return pt.q >= q_min && pt.q <= q_max && pt.p >= p_min && pt.p <= p_max; }
};

inline std::vector<PhasePoint> to_phase_points(const std::vector<ClassicalState>& states) {
    std::vector<PhasePoint> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back({s.x, s.v});
    return out;
}

inline void write_classical_poincare(const std::string& path, const std::vector<ClassicalState>& pts) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_classical_poincare: cannot open " + path);
    out << "n,x,v,q,p\n" << std::setprecision(17);
    for (std::size_t k = 0; k < pts.size(); ++k)
        out << k + 1 << ',' << pts[k].x << ',' << pts[k].v << ',' << pts[k].x << ',' << pts[k].v << '\n';
}

// --------------------------- Periodic orbits ---------------------------------

struct PeriodicOrbit {
    int period_cycles{1};
    std::vector<PhasePoint> section;  // one stroboscopic point per cycle of the orbit
    std::vector<PhasePoint> curve;    // densely sampled orbit over period_cycles drive periods

    double rms_radius() const {
        double cq = 0.0, cp = 0.0;
        for (const auto& pt : curve) {
            cq += pt.q;
            cp += pt.p;
        }
        cq /= static_cast<double>(curve.size());
        cp /= static_cast<double>(curve.size());
        double s = 0.0;
        for (const auto& pt : curve) s += (pt.q - cq) * (pt.q - cq) + (pt.p - cp) * (pt.p - cp);
        return std::sqrt(s / static_cast<double>(curve.size()));
    }
};

/// Detects a post-transient periodic attractor whose stroboscopic points repeat within tol.
/// Empty when the motion is not periodic with at most max_period cycles.
inline std::optional<PeriodicOrbit> find_periodic_orbit(const SimParams& p, int transient_cycles, int max_period = 8, double tol = 1e-6,
                                                        ClassicalState initial = {}, int curve_samples_per_cycle = 400) {
    const long steps_per = steps_per_period(p.omega, classical_dt(p));
    ClassicalState s = advance_periods(initial, p, transient_cycles, steps_per);
    std::vector<ClassicalState> strobe{s};
    for (int k = 0; k < max_period; ++k) {
        s = advance_periods(s, p, 1, steps_per);
        strobe.push_back(s);
    }
    for (int period = 1; period <= max_period; ++period) {
        if (std::hypot(strobe[period].x - strobe[0].x, strobe[period].v - strobe[0].v) > tol) continue;
        PeriodicOrbit orbit;
        orbit.period_cycles = period;
        for (int k = 0; k < period; ++k) orbit.section.push_back({strobe[k].x, strobe[k].v});
        const long sub = std::max(1L, steps_per / curve_samples_per_cycle);
        const double h = p.drive_period() / static_cast<double>(steps_per);
        ClassicalState c = strobe[0];
        for (long k = 0; k < steps_per * period; ++k) {
            if (k % sub == 0) orbit.curve.push_back({c.x, c.v});
            c = rk4_step(c, p, h);
        }
        return orbit;
    }
    return std::nullopt;
}

// --------------------------- Lyapunov process adapter ------------------------

/// Deterministic Duffing flow exposed through the twin-trajectory process interface; noise is ignored.
class ClassicalProcess {
public:
    ClassicalProcess(const SimParams& p, ClassicalState initial, double dt) : params_(p), state_(initial), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("ClassicalProcess: dt must be > 0");
    }

    double step_size() const { return dt_; }
    double time() const { return state_.t; }
    const ClassicalState& state() const { return state_; }

    void advance(const NoiseIncrement&) {
        state_ = rk4_step(state_, params_, dt_);
        ++steps_;
        state_.t = t0_ + static_cast<double>(steps_) * dt_;
    }

    PhasePoint phase_point() const { return {state_.x, state_.v}; }

    void displace(double dq, double dp) {
        state_.x += dq;
        state_.v += dp;
    }

private:
    SimParams params_;
    ClassicalState state_;
    double dt_;
    double t0_{state_.t};
    long steps_{0};
};

}  // namespace mqc
