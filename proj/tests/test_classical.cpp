// test_classical.cpp — driven Duffing reference dynamics

#include "mqc/checks.hpp"
#include "mqc/classical.hpp"

#include <gtest/gtest.h>

using namespace mqc;

TEST(Field, HandEvaluatedPoint) {
    SimParams p;  // gamma 0.1, g 0.3, beta 0.3, omega 1
    const auto d = duffing_rhs({2.0, -0.5, 0.0}, p);
    // x'' = -2 Gamma v - beta^2 x^3 + x + (g/beta) cos t = 0.1 - 0.72 + 2 + 1
    EXPECT_DOUBLE_EQ(d.dx, -0.5);
    EXPECT_NEAR(d.dv, 2.38, 1e-14);
}

TEST(Integrator, FourthOrderOnHarmonicOscillator) {
    auto rhs = [](const ClassicalState& s) { return ClassicalDerivative{s.v, -s.x}; };
    auto run = [&](double dt) {
        ClassicalState s{1.0, 0.0, 0.0};
        const int n = static_cast<int>(std::lround(2.0 / dt));
        for (int k = 0; k < n; ++k) s = rk4_step(s, rhs, dt);
        return std::abs(s.x - std::cos(2.0));
    };
    const double ratio = run(0.1) / run(0.05);
    EXPECT_NEAR(ratio, 16.0, 1.5);
}

TEST(Integrator, EnergyConservedWithoutDampingOrDrive) {
    SimParams p;
    p.gamma = 0.0;
    p.g = 0.0;
    ClassicalState s{0.3, 0.2, 0.0};
    const double e0 = duffing_energy(s, p);
    s = advance_periods(s, p, 20, steps_per_period(p.omega, classical_dt(p)));
    EXPECT_NEAR(duffing_energy(s, p), e0, 1e-8);
}

TEST(Integrator, RejectsNonPositiveStep) {
    SimParams p;
    EXPECT_THROW(rk4_step(ClassicalState{}, p, 0.0), std::invalid_argument);
}

TEST(Attractor, StrongDampingGivesPeriodOneOrbit) {
    SimParams p;
    p.gamma = 0.5;
    p.g = 0.05;
    const auto orbit = find_periodic_orbit(p, 100);
    ASSERT_TRUE(orbit.has_value());
    EXPECT_EQ(orbit->period_cycles, 1);
    EXPECT_GT(orbit->rms_radius(), 0.0);
}

TEST(Attractor, ChaoticParametersAreNotPeriodic) {
    SimParams p;  // Gamma = 0.10: the chaotic regime
    EXPECT_FALSE(find_periodic_orbit(p, 100).has_value());
}

TEST(Poincare, BoundingBoxAndInflation) {
    const std::vector<PhasePoint> pts = {{-1.0, 0.0}, {1.0, 2.0}, {0.0, -1.0}};
    const auto box = BoundingBox::of(pts);
    EXPECT_DOUBLE_EQ(box.q_min, -1.0);
    EXPECT_DOUBLE_EQ(box.p_max, 2.0);
    const auto big = box.inflated(1.5);
    EXPECT_TRUE(big.contains({1.4, 0.5}));
    EXPECT_FALSE(box.contains({1.4, 0.5}));
}

TEST(Lyapunov, ChaoticAndRegularAnchorsShortRun) {
    auto proto = classical_anchor_protocol();
    proto.total_cycles = 200;
    proto.n_realizations = 5;
    const auto chaotic = classical_lyapunov(0.10, proto, 101, 1);
    const auto regular = classical_lyapunov(0.05, proto, 102, 1);
    EXPECT_GT(chaotic.lambda_mean, 0.1);
    EXPECT_LT(regular.lambda_mean, 0.0);
}
