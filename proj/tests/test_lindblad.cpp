// test_lindblad.cpp — reference master-equation integrator

#include "mqc/lindblad.hpp"

#include <gtest/gtest.h>

using namespace mqc;

TEST(Lindblad, PreservesTraceHermiticityPositivity) {
    SimParams p;
    p.beta = 1.0;
    p.basis_size = 25;
    const Matrix rho0 = projector(coherent_state(cplx(1.0, 0.5), 25));
    const Matrix rho = evolve_density(p, rho0, 3.0);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-9);
    EXPECT_LT(hermiticity_error(rho), 1e-10);
    EXPECT_GT(min_eigenvalue(rho), -1e-8);
}

TEST(Lindblad, FockDecayRate) {
    // Pure damping with L = sqrt(2 Gamma) a: P1(t) = exp(-2 Gamma t)
    SimParams p;
    p.gamma = 0.15;
    p.basis_size = 6;
    const auto ops = build_operators(p).without_hamiltonian();
    const double t = 2.0;
    const Matrix rho = evolve_density(ops, projector(fock_state(1, 6)), t, 1e-3);
    EXPECT_NEAR(rho(1, 1).real(), std::exp(-2.0 * p.gamma * t), 1e-8);
    EXPECT_NEAR(rho(0, 0).real(), 1.0 - std::exp(-2.0 * p.gamma * t), 1e-8);
}

TEST(Lindblad, CoherentAmplitudeDecay) {
    SimParams p;
    p.gamma = 0.1;
    p.basis_size = 30;
    const auto ops = build_operators(p).without_hamiltonian();
    const cplx alpha(2.0, 1.0);
    const double t = 3.0;
    const Matrix rho = evolve_density(ops, projector(coherent_state(alpha, 30)), t, 1e-3);
    const cplx mean_a = (rho * annihilation(30)).trace();
    EXPECT_NEAR(std::abs(mean_a - alpha * std::exp(-p.gamma * t)), 0.0, 1e-6);
}

TEST(Lindblad, TraceDistanceBasics) {
    const Matrix a = projector(fock_state(0, 4)), b = projector(fock_state(1, 4));
    EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-12);
    EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-12);
}

TEST(Lindblad, RejectsOversizedBasis) {
    SimParams p;
    p.basis_size = kMaxDensityBasis + 1;
    EXPECT_THROW(evolve_density(p, Matrix::Identity(p.basis_size, p.basis_size), 1.0), std::invalid_argument);
}
