// sse.hpp — conditioned pure-state trajectories of the diffusive stochastic Schrödinger equation
//
//   d|psi> = (-iH - L^dag L/2 + <L^dag> L - <L^dag><L>/2) |psi> dt + (L - <L>) |psi> dxi
//
// in Ito form, with expectation values and the drive taken at the start of each step.

#pragma once

#include "mqc/core.hpp"
#include "mqc/fock.hpp"
#include "mqc/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mqc {

enum class SseScheme {
    // Drift: 4th-order Taylor of the step-frozen linear generator. Noise: Milstein
    // correction when the unraveling has a single real channel (|u| = 1), Euler otherwise.
    TaylorMilstein,
    // Plain Euler-Maruyama on the Ito form.
    EulerMaruyama,
};

inline constexpr double kTailThreshold = 1e-3;
inline constexpr int kTailLevels = 5;
inline constexpr long kGuardInterval = 100;

/// Reusable single-trajectory stepper; owns its scratch vectors, so one
/// instance per trajectory.
class SseStepper {
public:
    SseStepper(std::shared_ptr<const OperatorSet> ops, UnravelingSpec spec, SseScheme scheme = SseScheme::TaylorMilstein)
        : ops_(std::move(ops)), spec_(spec), scheme_(scheme) {
        if (!ops_) throw std::invalid_argument("SseStepper: null operator set");
        spec_.validate();
        const int n = ops_->n;
        for (Vector* w : {&work_a_, &work_b_, &work_c_, &work_d_, &work_e_}) w->resize(n);
        rot_ = std::exp(-I * spec_.phi);
        // -iH_static - L^dag L / 2 never changes, so it is applied as one banded operator.
        Matrix g0 = -I * ops_->h_static;
        for (int k = 0; k < n; ++k) g0(k, k) -= 0.5 * ops_->ltl_diag(k);
        static_generator_ = BandedMatrix::from_dense(g0);
    }

    const OperatorSet& ops() const { return *ops_; }
    const UnravelingSpec& spec() const { return spec_; }
    SseScheme scheme() const { return scheme_; }

    cplx mean_l(const Vector& psi) const { return std::sqrt(2.0 * ops_->gamma) * mean_annihilation(psi); }

    /// Advances psi (normalized) in place by one step. Returns |norm - 1| before renormalization.
    double step(Vector& psi, double t, double dt, cplx dxi) {
        const cplx ell = mean_l(psi);
        const double c = std::cos(ops_->omega * t);

        Vector& next = work_a_;
        Vector& term = work_b_;
        Vector& tmp = work_c_;
        next = psi;
        if (scheme_ == SseScheme::EulerMaruyama) {
            apply_generator(psi, term, c, ell);
            next += dt * term;
        } else {
            term = psi;
            for (int k = 1; k <= 4; ++k) {
                apply_generator(term, tmp, c, ell);
                term = tmp * (dt / static_cast<double>(k));
                next += term;
            }
        }

        // Stochastic part: b = (L - <L>) psi.
        Vector& b = work_b_;
        apply_l(psi, b);
        b -= ell * psi;
        if (scheme_ == SseScheme::TaylorMilstein && spec_.single_channel()) {
            const double dw = (std::conj(rot_) * dxi).real();
            Vector& gv = work_c_;
            gv = rot_ * b;
            next += dw * gv;
            // Directional derivative of g(psi) = e^{-i phi}(L - <L>)psi along g.
            Vector& lg = work_d_;
            Vector& lpsi = work_e_;
            apply_l(gv, lg);
            apply_l(psi, lpsi);
            const cplx dmean = gv.dot(lpsi) + psi.dot(lg);
            const cplx w = 0.5 * (dw * dw - dt) * rot_;
            next += w * (lg - ell * gv - dmean * psi);
        } else {
            next += dxi * b;
        }

        const double nrm = next.norm();
        if (!std::isfinite(nrm) || nrm == 0.0) throw SimulationError("sse step produced non-finite amplitudes at t = " + std::to_string(t));
        psi = next / nrm;
        return std::abs(nrm - 1.0);
    }

    // y = A x with A = -iH(t) - L^dag L/2 + <L>^* L - |<L>|^2/2.
    void apply_generator(const Vector& x, Vector& y, double cos_t, cplx ell) const {
        y.noalias() = -0.5 * std::norm(ell) * x;
        static_generator_.apply_add(x.data(), y.data());
        if (cos_t != 0.0) ops_->h_drive_band.apply_add(x.data(), y.data(), -I * cos_t);
        ops_->l_band.apply_add(x.data(), y.data(), std::conj(ell));
    }

private:
    void apply_l(const Vector& x, Vector& y) const {
        y.setZero(x.size());
        ops_->l_band.apply_add(x.data(), y.data());
    }

    std::shared_ptr<const OperatorSet> ops_;
    UnravelingSpec spec_;
    SseScheme scheme_;
    cplx rot_;
    BandedMatrix static_generator_;
    Vector work_a_, work_b_, work_c_, work_d_, work_e_;
};

inline void check_truncation(const StateVector& s, double t) {
    const double tail = s.tail_population(kTailLevels);
    if (tail > kTailThreshold) {
        std::ostringstream msg;
        msg << "truncation guard: top " << kTailLevels << " levels hold population " << tail << " > " << kTailThreshold
            << " at t = " << t << " (N = " << s.size() << "); increase basis_size";
        throw TruncationError(msg.str());
    }
}

/// One Ito step from a normalized state, with guard checks.
inline StateVector sse_step(const StateVector& state, const OperatorSet& ops, const UnravelingSpec& spec, double t, double dt,
                            cplx dxi, SseScheme scheme = SseScheme::TaylorMilstein) {
    if (!(dt > 0.0)) throw std::invalid_argument("sse_step: dt must be > 0");
    if (state.size() != ops.n) throw std::invalid_argument("sse_step: dimension mismatch");
    SseStepper stepper(std::make_shared<const OperatorSet>(ops), spec, scheme);
    StateVector out = state;
    stepper.step(out.amps, t, dt, dxi);
    check_truncation(out, t + dt);
    return out;
}

// --------------------------- Trajectories ------------------------------------

struct Snapshot {
    double t{0.0};
    StateVector state;
};

struct TrajectoryRecord {
    double dt{0.0};
    std::vector<double> times;
    std::vector<double> q_means;
    std::vector<double> p_means;
    std::vector<double> norms_prenormalization;  // max |norm - 1| over each sample interval
    std::vector<double> homodyne_signal;          // integrated record over each sample interval (|u| = 1 only)
    std::vector<Snapshot> states;

    std::size_t size() const { return times.size(); }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("TrajectoryRecord: cannot open " + path);
        out << "t,q_mean,p_mean,signal\n" << std::setprecision(17);
        for (std::size_t k = 0; k < times.size(); ++k) {
            out << times[k] << ',' << q_means[k] << ',' << p_means[k] << ',';
            if (homodyne_signal.empty())
                out << "nan";
            else
                out << homodyne_signal[k];
            out << '\n';
        }
    }
};

inline void write_snapshot(const std::string& path, const Snapshot& snap) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
    out << "# t " << std::setprecision(17) << snap.t << " N " << snap.state.size() << "\n";
    out << "n,re,im\n";
    for (int k = 0; k < snap.state.size(); ++k) out << k << ',' << snap.state.amps(k).real() << ',' << snap.state.amps(k).imag() << '\n';
}

struct SamplingPlan {
    long sample_every{1};           // steps between recorded samples
    bool record_initial{true};
    std::vector<long> snapshot_steps;  // step indices at which the full state is stored
};

inline TrajectoryRecord evolve_trajectory(std::shared_ptr<const OperatorSet> ops, const UnravelingSpec& spec, const StateVector& initial,
                                          double duration, const NoisePath& noise, const SamplingPlan& plan,
                                          SseScheme scheme = SseScheme::TaylorMilstein, double t0 = 0.0) {
    if (!(noise.dt > 0.0)) throw std::invalid_argument("evolve_trajectory: noise path has no step size");
    if (plan.sample_every < 1) throw std::invalid_argument("evolve_trajectory: sample_every must be >= 1");
    const double dt = noise.dt;
    const long steps = std::lround(duration / dt);
    if (steps < 0 || static_cast<std::size_t>(steps) > noise.size())
        throw std::invalid_argument("evolve_trajectory: noise path shorter than duration / dt");
    if (initial.size() != ops->n) throw std::invalid_argument("evolve_trajectory: dimension mismatch");

    SseStepper stepper(ops, spec, scheme);
    StateVector state = initial;
    const bool record_signal = spec.single_channel();
    std::vector<long> snaps = plan.snapshot_steps;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    TrajectoryRecord rec;
    rec.dt = dt;
    auto push_sample = [&](double t, double drift, double signal) {
        const PhasePoint m = quadrature_means(state);
        rec.times.push_back(t);
        rec.q_means.push_back(m.q);
        rec.p_means.push_back(m.p);
        rec.norms_prenormalization.push_back(drift);
        if (record_signal) rec.homodyne_signal.push_back(signal);
    };
    auto maybe_snapshot = [&](long k, double t) {
        while (next_snap < snaps.size() && snaps[next_snap] <= k) {
            if (snaps[next_snap] == k) rec.states.push_back({t, state});
            ++next_snap;
        }
    };

    if (plan.record_initial) push_sample(t0, 0.0, 0.0);
    maybe_snapshot(0, t0);

    double drift_max = 0.0;
    double signal_acc = 0.0;
    for (long k = 0; k < steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        const auto& inc = noise[static_cast<std::size_t>(k)];
        if (record_signal) {
            const cplx ell = stepper.mean_l(state.amps);
            const double dw = (std::exp(I * spec.phi) * inc.dxi).real();
            signal_acc += 2.0 * (std::exp(-I * spec.phi) * ell).real() * dt + dw;
        }
        drift_max = std::max(drift_max, stepper.step(state.amps, t, dt, inc.dxi));
        const long done = k + 1;
        const double tn = t0 + static_cast<double>(done) * dt;
        if (done % kGuardInterval == 0 || done == steps) check_truncation(state, tn);
        if (done % plan.sample_every == 0) {
            push_sample(tn, drift_max, signal_acc);
            drift_max = 0.0;
            signal_acc = 0.0;
        }
        maybe_snapshot(done, tn);
    }
    return rec;
}

inline TrajectoryRecord evolve_trajectory(const SimParams& params, const StateVector& initial, double duration, const NoisePath& noise,
                                          const SamplingPlan& plan, SseScheme scheme = SseScheme::TaylorMilstein) {
    auto ops = std::make_shared<const OperatorSet>(build_operators(params));
    return evolve_trajectory(ops, unraveling_of(params), initial, duration, noise, plan, scheme);
}

/// Stroboscopic (<Q>, <P>) samples at t = 2 pi n / omega, n = 1..n_points.
inline std::vector<PhasePoint> poincare_section(const TrajectoryRecord& record, double omega, int n_points) {
    if (n_points < 0) throw std::invalid_argument("poincare_section: n_points must be >= 0");
    std::vector<PhasePoint> out;
    out.reserve(static_cast<std::size_t>(n_points));
    const double tol = 0.5 * record.dt + 1e-12;
    for (int n = 1; n <= n_points; ++n) {
        const double target = 2.0 * pi * n / omega;
        if (record.times.empty() || record.times.back() < target - tol)
            throw std::invalid_argument("poincare_section: record spans fewer than n_points drive periods");
        auto it = std::lower_bound(record.times.begin(), record.times.end(), target - tol);
        if (it == record.times.end() || std::abs(*it - target) > tol)
            throw std::invalid_argument("poincare_section: no sample within dt/2 of a stroboscopic instant");
        const auto k = static_cast<std::size_t>(it - record.times.begin());
        out.push_back({record.q_means[k], record.p_means[k]});
    }
    return out;
}

// --------------------------- Lyapunov process adapter ------------------------

/// Quantum trajectory exposed through the twin-trajectory process interface.
class SseProcess {
public:
    SseProcess(std::shared_ptr<const OperatorSet> ops, const UnravelingSpec& spec, StateVector initial, double dt,
               SseScheme scheme = SseScheme::TaylorMilstein)
        : stepper_(std::move(ops), spec, scheme), state_(std::move(initial)), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("SseProcess: dt must be > 0");
    }

    double step_size() const { return dt_; }
    double time() const { return t_; }
    const StateVector& state() const { return state_; }

    void advance(const NoiseIncrement& inc) {
        stepper_.step(state_.amps, t_, dt_, inc.dxi);
        ++steps_;
        t_ = static_cast<double>(steps_) * dt_;
        if (steps_ % kGuardInterval == 0) check_truncation(state_, t_);
    }

    PhasePoint phase_point() const { return quadrature_means(state_); }

    void displace(double dq, double dp) { state_ = mqc::displace(state_, dq, dp); }

private:
    SseStepper stepper_;
    StateVector state_;
    double dt_;
    double t_{0.0};
    long steps_{0};
};

}  // namespace mqc
