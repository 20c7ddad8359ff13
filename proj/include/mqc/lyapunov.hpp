// lyapunov.hpp — twin-trajectory estimate of the largest Lyapunov exponent
//
// A fiducial and a shadow process consume the same noise increments. After every
// reset interval the separation d_t of their (q, p) points is logged as log(d_t/d0)
// and the shadow is moved back along the separation to distance d0.

#pragma once

#include "mqc/core.hpp"
#include "mqc/noise.hpp"
#include "mqc/parallel.hpp"
#include "mqc/stats.hpp"

#include <cmath>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqc {

inline double phase_distance(const PhasePoint& a, const PhasePoint& b) { return std::hypot(a.q - b.q, a.p - b.p); }

/// Anything that advances by one step per noise increment, reports a phase point,
/// and can be rigidly shifted in (q, p).
template <class P>
concept MonitoredProcess = std::copy_constructible<P> && requires(P p, const P cp, const NoiseIncrement& inc) {
    { cp.step_size() } -> std::convertible_to<double>;
    { cp.phase_point() } -> std::convertible_to<PhasePoint>;
    p.advance(inc);
    p.displace(0.0, 0.0);
};

struct LyapunovProtocol {
    double d0{1e-3};
    double reset_interval{1.0};  // in drive periods
    int total_cycles{500};
    int discard_cycles{10};
    int n_realizations{20};
    double underflow{1e-14};
    // Beyond this separation the twins have left the linear regime (for quantum states,
    // typically a measurement-driven branch split). The shadow is then rebuilt as a copy of
    // the fiducial displaced by d0 instead of being dragged across the gap.
    double resync_distance{0.1};

    void validate() const {
        if (!(d0 > 0.0)) throw std::invalid_argument("LyapunovProtocol: d0 must be > 0");
        if (!(reset_interval > 0.0)) throw std::invalid_argument("LyapunovProtocol: reset_interval must be > 0");
        if (total_cycles <= discard_cycles || discard_cycles < 0)
            throw std::invalid_argument("LyapunovProtocol: total_cycles must exceed discard_cycles >= 0");
        if (n_realizations < 1) throw std::invalid_argument("LyapunovProtocol: n_realizations must be >= 1");
        if (!(resync_distance > d0)) throw std::invalid_argument("LyapunovProtocol: resync_distance must exceed d0");
    }
};

struct RealizationResult {
    int index{0};
    double lambda{0.0};
    bool excluded{false};
    std::string diagnostic;
    int n_resets{0};
    int n_resyncs{0};             // resets that rebuilt the shadow from the fiducial
    double max_reset_error{0.0};  // max |d after reset - d0| / d0
    std::vector<double> running;  // running exponent at each drive-cycle boundary
};

struct LyapunovEstimate {
    double lambda_mean{0.0};
    double sem{0.0};
    int n_realizations{0};
    int n_resets{0};
    std::vector<double> convergence;  // mean running exponent per drive cycle
    std::vector<RealizationResult> realizations;

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("LyapunovEstimate: cannot open " + path);
        out << "realization,lambda\n" << std::setprecision(17);
        for (const auto& r : realizations) {
            out << r.index << ',';
            if (r.excluded)
                out << "nan";
            else
                out << r.lambda;
            out << '\n';
        }
    }
};

struct NoObserver {
    template <class P>
    void operator()(long, const P&) const {}
};

/// One realization. `observer(step, fiducial)` sees the fiducial after every step.
template <MonitoredProcess Process, class Observer = NoObserver>
RealizationResult run_twin_realization(Process fiducial, const UnravelingSpec& spec, const LyapunovProtocol& proto, double period,
                                       std::uint64_t seed, int index = 0, Observer&& observer = {}) {
    proto.validate();
    const double dt = fiducial.step_size();
    const long steps_per_reset = std::max(1L, std::lround(proto.reset_interval * period / dt));
    const double reset_time = static_cast<double>(steps_per_reset) * dt;
    const long n_resets = std::lround(proto.total_cycles / proto.reset_interval);
    const long discard = std::lround(proto.discard_cycles / proto.reset_interval);

    RealizationResult res;
    res.index = index;
    Process shadow = fiducial;
    shadow.displace(proto.d0, 0.0);
    NoiseStream rng(seed);

    double sum_post = 0.0, time_post = 0.0, sum_all = 0.0, time_all = 0.0;
    long step = 0;
    int next_cycle = 1;
    try {
        for (long r = 0; r < n_resets; ++r) {
            for (long s = 0; s < steps_per_reset; ++s) {
                const NoiseIncrement inc = sample_increment(spec, dt, rng);
                fiducial.advance(inc);
                shadow.advance(inc);
                ++step;
                observer(step, fiducial);
            }
            const PhasePoint a = fiducial.phase_point();
            const PhasePoint b = shadow.phase_point();
            const double d = phase_distance(a, b);
            if (!std::isfinite(d)) throw SimulationError("process divergence: non-finite separation");
            if (d < proto.underflow) {
                res.excluded = true;
                res.diagnostic = "separation underflow (" + std::to_string(d) + ") at reset " + std::to_string(r);
                break;
            }
            const double lg = std::log(d / proto.d0);
            sum_all += lg;
            time_all += reset_time;
            if (r >= discard) {
                sum_post += lg;
                time_post += reset_time;
            }
            if (d > proto.resync_distance) {
                shadow = fiducial;
                shadow.displace(proto.d0 * (b.q - a.q) / d, proto.d0 * (b.p - a.p) / d);
                ++res.n_resyncs;
            } else {
                const double factor = -(1.0 - proto.d0 / d);
                shadow.displace(factor * (b.q - a.q), factor * (b.p - a.p));
            }
            const double after = phase_distance(fiducial.phase_point(), shadow.phase_point());
            res.max_reset_error = std::max(res.max_reset_error, std::abs(after - proto.d0) / proto.d0);
            ++res.n_resets;

            const double elapsed = static_cast<double>(step) * dt;
            const double running = time_post > 0.0 ? sum_post / time_post : sum_all / time_all;
            while (next_cycle <= proto.total_cycles && elapsed + 1e-9 * period >= next_cycle * period) {
                res.running.push_back(running);
                ++next_cycle;
            }
        }
    } catch (const SimulationError& e) {
        res.excluded = true;
        res.diagnostic = e.what();
    }
    if (!res.excluded) {
        if (time_post <= 0.0) {
            res.excluded = true;
            res.diagnostic = "no resets after the discarded transient";
        } else {
            res.lambda = sum_post / time_post;
        }
    }
    return res;
}

inline LyapunovEstimate aggregate_lyapunov(std::vector<RealizationResult> results) {
    LyapunovEstimate est;
    std::vector<double> lambdas;
    std::size_t conv_len = 0;
    for (const auto& r : results)
        if (!r.excluded) conv_len = std::max(conv_len, r.running.size());
    est.convergence.assign(conv_len, 0.0);
    std::vector<int> counts(conv_len, 0);
    for (const auto& r : results) {
        if (r.excluded) continue;
        lambdas.push_back(r.lambda);
        est.n_resets = std::max(est.n_resets, r.n_resets);
        for (std::size_t k = 0; k < r.running.size(); ++k) {
            est.convergence[k] += r.running[k];
            ++counts[k];
        }
    }
    if (lambdas.empty()) {
        std::string why = results.empty() ? "no realizations" : results.front().diagnostic;
        throw SimulationError("estimate_lyapunov: every realization was excluded (" + why + ")");
    }
    for (std::size_t k = 0; k < conv_len; ++k) est.convergence[k] /= std::max(1, counts[k]);
    est.lambda_mean = stats::mean(lambdas);
    est.sem = stats::sem(lambdas);
    est.n_realizations = static_cast<int>(lambdas.size());
    est.realizations = std::move(results);
    return est;
}

/// `make_fiducial(realization_index, realization_seed)` returns the fiducial process;
/// realization r draws its noise from derive_seed(master_seed, {r}).
template <class Factory>
LyapunovEstimate estimate_lyapunov(Factory&& make_fiducial, const UnravelingSpec& spec, const LyapunovProtocol& proto, double period,
                                   std::uint64_t master_seed, int jobs = 1) {
    proto.validate();
    std::vector<RealizationResult> results(static_cast<std::size_t>(proto.n_realizations));
    parallel_for(results.size(), jobs, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(master_seed, {static_cast<std::uint64_t>(r)});
        auto fid = make_fiducial(static_cast<int>(r), seed);
        results[r] = run_twin_realization(std::move(fid), spec, proto, period, seed, static_cast<int>(r));
    });
    return aggregate_lyapunov(std::move(results));
}

}  // namespace mqc
