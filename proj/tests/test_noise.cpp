// test_noise.cpp — measurement noise increments, seeding and paths

#include "mqc/noise.hpp"

#include <gtest/gtest.h>

using namespace mqc;

namespace {

struct Moments {
    cplx m1, m2;
    double m_abs;
};

Moments sample_moments(const UnravelingSpec& spec, double dt, int n, std::uint64_t seed) {
    NoiseStream rng(seed);
    Moments m{0.0, 0.0, 0.0};
    for (int k = 0; k < n; ++k) {
        const cplx x = sample_increment(spec, dt, rng).dxi;
        m.m1 += x;
        m.m2 += x * x;
        m.m_abs += std::norm(x);
    }
    m.m1 /= n;
    m.m2 /= n;
    m.m_abs /= n;
    return m;
}

}  // namespace

TEST(Increment, SecondMomentsMatchUnraveling) {
    const double dt = 0.01;
    const int n = 400000;
    const double tol = 5.0 * dt * std::sqrt(2.0 / n);
    for (auto spec : {UnravelingSpec{1.0, 0.0}, UnravelingSpec{0.4, 1.1}, UnravelingSpec{0.0, 0.0}, UnravelingSpec{0.9, 2.5}}) {
        const auto m = sample_moments(spec, dt, n, 7);
        EXPECT_NEAR(std::abs(m.m1), 0.0, 5.0 * std::sqrt(dt / n));
        EXPECT_NEAR(m.m_abs, dt, tol);
        EXPECT_NEAR(std::abs(m.m2 - spec.u() * dt), 0.0, tol);
    }
}

TEST(Increment, ExactAlgebraicMoments) {
    // Deterministic check of the construction: E over (dw1, dw2) in {+-1}^2 symmetric set.
    const UnravelingSpec spec{0.3, 0.8};
    cplx m2 = 0.0;
    double ma = 0.0;
    for (double a : {-1.0, 1.0})
        for (double b : {-1.0, 1.0}) {
            const cplx x = make_increment(spec, a, b).dxi;
            m2 += x * x / 4.0;
            ma += std::norm(x) / 4.0;
        }
    EXPECT_NEAR(ma, 1.0, 1e-14);
    EXPECT_NEAR(std::abs(m2 - spec.u()), 0.0, 1e-14);
}

TEST(Increment, HomodyneQuadratureLimits) {
    // |u| = 1: phi = 0 has a real increment (Q record), phi = pi/2 an imaginary one (P record)
    const auto q = make_increment({1.0, 0.0}, 0.3, 0.7).dxi;
    const auto p = make_increment({1.0, pi / 2}, 0.3, 0.7).dxi;
    EXPECT_NEAR(q.imag(), 0.0, 1e-15);
    EXPECT_NEAR(p.real(), 0.0, 1e-15);
}

TEST(Optics, MapsToEquivalentUnraveling) {
    const double eta = 0.7, phi1 = 0.4, phi2 = 1.9, dt = 0.01;
    const auto spec = unraveling_from_optics(eta, phi1, phi2);
    const cplx u_expected = std::conj(eta * std::exp(2.0 * I * phi1) + (1.0 - eta) * std::exp(2.0 * I * phi2));
    EXPECT_NEAR(std::abs(spec.u() - u_expected), 0.0, 1e-12);
    NoiseStream rng(11);
    cplx m2 = 0.0;
    double ma = 0.0;
    const int n = 400000;
    for (int k = 0; k < n; ++k) {
        const cplx x = optics_noise_increment(eta, phi1, phi2, dt, rng).dxi;
        m2 += x * x;
        ma += std::norm(x);
    }
    EXPECT_NEAR(ma / n, dt, 5.0 * dt * std::sqrt(2.0 / n));
    EXPECT_NEAR(std::abs(m2 / static_cast<double>(n) - spec.u() * dt), 0.0, 5.0 * dt * std::sqrt(2.0 / n));
}

TEST(Optics, PhaseWrapAndValidation) {
    EXPECT_NEAR(wrap_phase_mod_pi(-pi / 4), 3 * pi / 4, 1e-15);
    EXPECT_NEAR(wrap_phase_mod_pi(5 * pi / 4), pi / 4, 1e-12);
    EXPECT_THROW(unraveling_from_optics(1.5, 0, 0), std::invalid_argument);
    EXPECT_EQ(unraveling_from_optics(1.0, 0.3, 2.0).u_abs, 1.0);
}

TEST(Spec, Validation) {
    EXPECT_THROW((UnravelingSpec{1.2, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((UnravelingSpec{-0.1, 0.0}.validate()), std::invalid_argument);
    NoiseStream rng(1);
    EXPECT_THROW(sample_increment({1.0, 0.0}, 0.0, rng), std::invalid_argument);
}

TEST(Seeds, DeterministicAndDistinct) {
    const auto a = NoisePath::generate({1.0, 0.3}, 0.01, 100, 42);
    const auto b = NoisePath::generate({1.0, 0.3}, 0.01, 100, 42);
    const auto c = NoisePath::generate({1.0, 0.3}, 0.01, 100, 43);
    for (std::size_t k = 0; k < 100; ++k) EXPECT_EQ(a[k].dxi, b[k].dxi);
    EXPECT_NE(a[0].dxi, c[0].dxi);
    EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
    EXPECT_EQ(derive_seed(9, {3}), derive_seed(9, {3}));
    EXPECT_NE(hash_double(0.0), hash_double(pi));
}

TEST(Paths, RefinementPreservesCoarseIncrements) {
    const auto coarse = NoisePath::generate({0.6, 1.0}, 0.02, 50, 5);
    const auto fine = coarse.refined(6);
    ASSERT_EQ(fine.size(), 100u);
    EXPECT_DOUBLE_EQ(fine.dt, 0.01);
    for (std::size_t k = 0; k < 50; ++k) {
        EXPECT_NEAR(std::abs(fine[2 * k].dxi + fine[2 * k + 1].dxi - coarse[k].dxi), 0.0, 1e-15);
    }
}
