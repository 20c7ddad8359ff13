// test_semiclassical.cpp — Gaussian-closure moment dynamics and regime residence

#include "mqc/checks.hpp"
#include "mqc/semiclassical.hpp"

#include <gtest/gtest.h>

using namespace mqc;

TEST(Closure, ZeroVarianceReducesToClassicalField) { EXPECT_LT(semiclassical_reduction_error(200, 7), 1e-12); }

TEST(Closure, EfficientMonitoringKeepsStatePure) {
    SimParams p;
    p.beta = 0.3;
    const double dt = semiclassical_dt(p);
    const long steps = std::lround(5 * p.drive_period() / dt);
    const auto noise = NoisePath::generate(unraveling_of(p), dt, static_cast<std::size_t>(steps), 8);
    const auto traj = evolve_semiclassical(p, GaussianState::coherent(1.0, 0.0), noise, steps, steps);
    EXPECT_NEAR(traj.back().det(), 0.25, 1e-3);
}

TEST(Closure, DeterministicForFixedNoise) {
    SimParams p;
    const double dt = semiclassical_dt(p);
    const auto noise = NoisePath::generate(unraveling_of(p), dt, 5000, 9);
    const auto a = evolve_semiclassical(p, GaussianState::coherent(0.5, 0.5), noise, 5000, 1000);
    const auto b = evolve_semiclassical(p, GaussianState::coherent(0.5, 0.5), noise, 5000, 1000);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(a.back().q, b.back().q);
    EXPECT_EQ(a.back().vqp, b.back().vqp);
}

TEST(Closure, ProcessAdapterDisplaces) {
    SimParams p;
    SemiclassicalProcess proc(p, unraveling_of(p), GaussianState::coherent(0.0, 0.0), semiclassical_dt(p));
    proc.displace(0.2, -0.1);
    EXPECT_DOUBLE_EQ(proc.phase_point().q, 0.2);
    EXPECT_DOUBLE_EQ(proc.phase_point().p, -0.1);
}

TEST(Residence, SyntheticClassification) {
    PeriodicOrbit orbit;
    for (int k = 0; k < 100; ++k) orbit.curve.push_back({3.0 + std::cos(2 * pi * k / 100.0), std::sin(2 * pi * k / 100.0)});
    // on the orbit, on its mirror image, and at the origin
    const std::vector<PhasePoint> pts = {{4.0, 0.0}, {-4.0, 0.0}, {0.0, 0.0}, {0.0, 0.1}, {2.0, 0.0}};
    const auto r = regime_residence(pts, orbit);
    EXPECT_NEAR(r.frac_periodic, 0.6, 1e-12);
    EXPECT_EQ(r.transitions, 2);
    EXPECT_NEAR(r.tube_radius, kTubeFraction * orbit.rms_radius(), 1e-12);
    EXPECT_THROW(regime_residence(std::vector<PhasePoint>{}, orbit), std::invalid_argument);
}

TEST(Closure, SplitStepConsistentWithMomentField) {
    SimParams p;
    p.gamma = 0.05;
    p.u_abs = 0.7;
    p.phi = 0.4;
    const GaussianState s{1.2, -0.3, 0.9, 0.6, 0.2, 0.7};
    const double dt = 1e-5;
    const auto d = gaussian_moment_rhs(s, p, unraveling_of(p), s.t, dt, 0.0);
    const auto n = gaussian_step(s, p, unraveling_of(p), dt, 0.0);
    EXPECT_NEAR((n.vqq - s.vqq) / dt, d.dvqq / dt, 1e-4);
    EXPECT_NEAR((n.vpp - s.vpp) / dt, d.dvpp / dt, 1e-4);
    EXPECT_NEAR((n.vqp - s.vqp) / dt, d.dvqp / dt, 1e-4);
}

TEST(Closure, CovarianceStaysPositiveOnLongRuns) {
    // weak damping shears the ellipse strongly; an Euler covariance step loses positivity here
    SimParams p;
    p.gamma = 0.05;
    for (std::uint64_t seed : {1, 2, 3}) {
        const double dt = semiclassical_dt(p);
        const long steps = std::lround(300 * p.drive_period() / dt);
        const auto noise = NoisePath::generate(unraveling_of(p), dt, static_cast<std::size_t>(steps), seed);
        EXPECT_NO_THROW(evolve_semiclassical(p, GaussianState::coherent(0.0, 0.0), noise, steps, steps));
    }
}

TEST(Closure, NoiselessChaoticRunStaysInsideClassicalBox) {
    SimParams p;  // Gamma = 0.10
    const auto box = BoundingBox::of(to_phase_points(classical_poincare(p, 2000, 100, {0.0, 0.0, 0.0}))).inflated(1.5);
    const double dt = semiclassical_dt(p);
    const long per = steps_per_period(p.omega, dt);
    const auto noise = NoisePath::zeros(unraveling_of(p), dt, static_cast<std::size_t>(300 * per));
    const auto traj = evolve_semiclassical(p, GaussianState::coherent(0.0, 0.0), noise, 300 * per, per);
    for (std::size_t k = 20; k < traj.size(); ++k) EXPECT_TRUE(box.contains({traj[k].q, traj[k].p})) << "cycle " << k;
}

TEST(Residence, AlternatingHalves) {
    PeriodicOrbit orbit;
    orbit.curve = {{3.0, 0.0}, {3.0, 1.0}};
    std::vector<PhasePoint> pts(10, PhasePoint{3.0, 0.0});
    for (int k = 5; k < 10; ++k) pts[k] = {0.0, 0.0};
    const auto r = regime_residence(pts, orbit);
    EXPECT_DOUBLE_EQ(r.frac_periodic, 0.5);
    EXPECT_DOUBLE_EQ(r.frac_chaotic, 0.5);
    EXPECT_EQ(r.transitions, 1);
}
