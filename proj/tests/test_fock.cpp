// test_fock.cpp — Fock-basis states and operators

#include "mqc/fock.hpp"

#include <gtest/gtest.h>

using namespace mqc;

TEST(Ladder, AnnihilationMatrixElements) {
    const Matrix a = annihilation(6);
    for (int n = 1; n < 6; ++n) EXPECT_DOUBLE_EQ(a(n - 1, n).real(), std::sqrt(static_cast<double>(n)));
    EXPECT_EQ(a(1, 0), cplx(0.0));
    EXPECT_EQ(a(0, 0), cplx(0.0));
}

TEST(Ladder, CanonicalCommutatorBelowTruncation) {
    SimParams p;
    p.basis_size = 20;
    const auto ops = build_operators(p);
    const Matrix c = ops.q_op * ops.p_op - ops.p_op * ops.q_op;
    // [Q, P] = i holds exactly except in the last row/column of the truncated basis
    const Matrix inner = c.topLeftCorner(19, 19);
    EXPECT_LT((inner - I * Matrix::Identity(19, 19)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(States, CoherentMeanAndNorm) {
    const cplx alpha(1.2, -0.7);
    const auto s = coherent_state(alpha, 40);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(mean_annihilation(s.amps) - alpha), 0.0, 1e-10);
    const auto qp = quadrature_means(s);
    EXPECT_NEAR(qp.q, std::sqrt(2.0) * alpha.real(), 1e-10);
    EXPECT_NEAR(qp.p, std::sqrt(2.0) * alpha.imag(), 1e-10);
}

TEST(States, CoherentRejectsUnresolvedAmplitude) {
    EXPECT_FALSE(coherent_fits(6.0, 20));
    EXPECT_THROW(coherent_state(6.0, 20), std::invalid_argument);
}

TEST(States, FockStateRange) {
    EXPECT_THROW(fock_state(5, 5), std::invalid_argument);
    EXPECT_THROW(fock_state(-1, 5), std::invalid_argument);
    EXPECT_EQ(fock_state(2, 5).amps(2), cplx(1.0));
}

TEST(States, CatParityAndNorm) {
    const auto even = cat_state(2.0, +1, 40);
    const auto odd = cat_state(2.0, -1, 40);
    EXPECT_NEAR(even.norm_squared(), 1.0, 1e-12);
    for (int n = 1; n < 40; n += 2) EXPECT_NEAR(std::abs(even.amps(n)), 0.0, 1e-12);
    for (int n = 0; n < 40; n += 2) EXPECT_NEAR(std::abs(odd.amps(n)), 0.0, 1e-12);
}

TEST(States, DisplaceShiftsQuadratures) {
    const auto s = coherent_state(cplx(0.5, 0.2), 40);
    const auto d = displace(s, 0.3, -0.4);
    const auto a = quadrature_means(s), b = quadrature_means(d);
    EXPECT_NEAR(b.q - a.q, 0.3, 1e-10);
    EXPECT_NEAR(b.p - a.p, -0.4, 1e-10);
    EXPECT_NEAR(d.norm_squared(), 1.0, 1e-12);
}

TEST(Operators, HamiltonianVacuumElement) {
    // <0|H|0> = 1/4 + (beta^2/4)(3/4) - 1/4: untouched by truncation of the quartic term
    SimParams p;
    p.beta = 0.7;
    p.basis_size = 8;
    const auto ops = build_operators(p);
    EXPECT_NEAR(ops.h_static(0, 0).real(), 3.0 * p.beta * p.beta / 16.0, 1e-12);
    EXPECT_LT((ops.h_static - ops.h_static.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Operators, QuarticTopCornerIsExact) {
    // Projection of the exact operator: <N-1|Q^4|N-1> = (6n^2 + 6n + 3)/4 with n = N-1
    SimParams p;
    p.beta = 1.0;
    p.gamma = 0.0;
    p.basis_size = 10;
    const auto ops = build_operators(p);
    const double n = 9.0;
    const double expected = 0.5 * (n + 0.5) + 0.25 * (6 * n * n + 6 * n + 3) / 4.0 - 0.5 * (n + 0.5);
    EXPECT_NEAR(ops.h_static(9, 9).real(), expected, 1e-10);
}

TEST(Operators, JumpOperatorIsScaledAnnihilation) {
    SimParams p;
    p.gamma = 0.2;
    p.basis_size = 12;
    const auto ops = build_operators(p);
    EXPECT_LT((ops.l_op - std::sqrt(2.0 * p.gamma) * annihilation(12)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((ops.l_op - (ops.q_op + I * ops.p_op) * std::sqrt(p.gamma)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Banded, MatchesDenseProduct) {
    SimParams p;
    p.basis_size = 15;
    const auto ops = build_operators(p);
    const auto band = BandedMatrix::from_dense(ops.h_static);
    Vector x = Vector::Random(15);
    EXPECT_LT(((band * x) - ops.h_static * x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((band.to_dense() - ops.h_static).cwiseAbs().maxCoeff(), 1e-14);
}
