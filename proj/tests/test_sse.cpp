// test_sse.cpp — stochastic Schrodinger integrator

#include "mqc/lindblad.hpp"
#include "mqc/sse.hpp"

#include <gtest/gtest.h>

using namespace mqc;

namespace {

// beta = 1 kicks wavepacket tails to high Fock levels within t ~ 0.3; beta = 0.5 stays well inside N = 30
SimParams small_params(int n = 30) {
    SimParams p;
    p.beta = 0.5;
    p.basis_size = n;
    return p;
}

// Dense Ito step, normalized: psi + [-iH - L^dag L/2 + <L>^* L - |<L>|^2/2] psi dt + (L - <L>) psi dxi
Vector dense_euler(const OperatorSet& ops, const Vector& psi, double t, double dt, cplx dxi) {
    const Matrix h = hamiltonian_at(ops, t);
    const cplx ell = psi.dot(ops.l_op * psi);
    const Vector lpsi = ops.l_op * psi;
    Vector next = psi + dt * (-I * (h * psi) - 0.5 * (ops.l_op.adjoint() * lpsi) + std::conj(ell) * lpsi - 0.5 * std::norm(ell) * psi) +
                  dxi * (lpsi - ell * psi);
    return next / next.norm();
}

StateVector final_state(const SimParams& p, const NoisePath& noise, double duration, SseScheme scheme = SseScheme::TaylorMilstein) {
    SamplingPlan plan;
    plan.sample_every = static_cast<long>(noise.size());
    plan.snapshot_steps = {static_cast<long>(noise.size())};
    return evolve_trajectory(std::make_shared<const OperatorSet>(build_operators(p)), unraveling_of(p), coherent_state(cplx(1.0, 0.3), p.basis_size),
                             duration, noise, plan, scheme)
        .states.back()
        .state;
}

}  // namespace

TEST(Step, EulerMatchesDenseFormula) {
    SimParams p = small_params();
    p.u_abs = 0.6;
    p.phi = 0.9;
    const auto ops = build_operators(p);
    const auto psi = coherent_state(cplx(0.8, -0.4), p.basis_size);
    const cplx dxi(0.013, -0.021);
    const double t = 0.37, dt = 1e-3;
    const auto out = sse_step(psi, ops, unraveling_of(p), t, dt, dxi, SseScheme::EulerMaruyama);
    EXPECT_LT((out.amps - dense_euler(ops, psi.amps, t, dt, dxi)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Step, DarkStateIsStationaryUnderMonitoring) {
    SimParams p = small_params();
    const auto ops = build_operators(p).without_hamiltonian();
    auto psi = fock_state(0, p.basis_size);
    NoiseStream rng(3);
    for (int k = 0; k < 200; ++k) psi = sse_step(psi, ops, unraveling_of(p), k * 1e-3, 1e-3, sample_increment(unraveling_of(p), 1e-3, rng).dxi);
    EXPECT_NEAR(std::norm(psi.amps(0)), 1.0, 1e-14);
}

TEST(Step, RejectsBadInput) {
    const auto ops = build_operators(small_params());
    EXPECT_THROW(sse_step(fock_state(0, 30), ops, {1.0, 0.0}, 0.0, 0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(sse_step(fock_state(0, 10), ops, {1.0, 0.0}, 0.0, 1e-3, 0.0), std::invalid_argument);
}

TEST(Guard, TruncationErrorOnTopLevels) {
    EXPECT_THROW(check_truncation(fock_state(29, 30), 0.0), TruncationError);
    EXPECT_NO_THROW(check_truncation(fock_state(2, 30), 0.0));
}

TEST(Trajectory, NormAndDeterminism) {
    const SimParams p = small_params();
    const double dt = 1e-3;
    const auto noise = NoisePath::generate(unraveling_of(p), dt, 1000, 17);
    const auto a = final_state(p, noise, 1.0);
    const auto b = final_state(p, noise, 1.0);
    EXPECT_NEAR(a.norm_squared(), 1.0, 1e-12);
    EXPECT_EQ((a.amps - b.amps).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Trajectory, StrongConvergenceUnderRefinement) {
    // same Brownian path at dt, dt/2 and a fine reference dt/16
    SimParams p = small_params();
    const double dt = 8e-3, t = 1.0;
    const auto coarse = NoisePath::generate(unraveling_of(p), dt, std::lround(t / dt), 23);
    const auto half = coarse.refined(24);
    const auto ref = half.refined(25).refined(26).refined(27);
    const auto s_ref = final_state(p, ref, t);
    auto err = [&](const NoisePath& n) { return (final_state(p, n, t).amps - s_ref.amps).norm(); };
    const double e1 = err(coarse), e2 = err(half);
    EXPECT_LT(e2, e1 / 1.4) << "errors " << e1 << " " << e2;
    EXPECT_LT(e1, 0.05);
}

TEST(Trajectory, EnsembleAverageReproducesMasterEquation) {
    SimParams p = small_params();
    p.u_abs = 0.5;
    p.phi = 0.7;
    const double dt = 1e-3, t = 1.0;
    const int n_traj = 400;
    const auto psi0 = coherent_state(cplx(1.0, 0.3), p.basis_size);
    Matrix avg = Matrix::Zero(p.basis_size, p.basis_size);
    for (int r = 0; r < n_traj; ++r) {
        const auto s = final_state(p, NoisePath::generate(unraveling_of(p), dt, std::lround(t / dt), derive_seed(99, {static_cast<std::uint64_t>(r)})), t);
        avg += projector(s) / static_cast<double>(n_traj);
    }
    const Matrix rho = evolve_density(build_operators(p), projector(psi0), t, dt);
    EXPECT_LT(trace_distance(avg, rho), 0.06);
}

TEST(Trajectory, PoincareSectionPicksDrivePeriods) {
    SimParams p = small_params();
    const double dt = p.drive_period() / 2000.0;
    const auto noise = NoisePath::generate(unraveling_of(p), dt, 6000, 4);
    SamplingPlan plan;
    plan.sample_every = 100;
    const auto rec = evolve_trajectory(p, coherent_state(0.5, p.basis_size), 6000 * dt, noise, plan);
    const auto pts = poincare_section(rec, p.omega, 3);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[2].q, rec.q_means.back());
    EXPECT_THROW(poincare_section(rec, p.omega, 4), std::invalid_argument);
}
