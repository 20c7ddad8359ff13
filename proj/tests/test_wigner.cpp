// test_wigner.cpp — Wigner transform, negativity and negativity statistics

#include "mqc/checks.hpp"
#include "mqc/wigner.hpp"

#include <gtest/gtest.h>

using namespace mqc;

namespace {

GridSpec symmetric_grid(double half, int points) { return {-half, half, -half, half, points, points}; }

}  // namespace

TEST(Wigner, VacuumIsGaussian) {
    const GridSpec grid = symmetric_grid(6.0, 121);
    const auto w = wigner_transform(fock_state(0, 10), grid);
    for (int i = 0; i < grid.n_q; i += 17)
        for (int j = 0; j < grid.n_p; j += 13) {
            const double q = grid.q(i), p = grid.p(j);
            EXPECT_NEAR(w.values(j, i), std::exp(-q * q - p * p) / pi, 1e-8);
        }
    EXPECT_NEAR(w.integral(), 1.0, 1e-6);
}

TEST(Wigner, FockParityAtOrigin) {
    const GridSpec grid = symmetric_grid(6.0, 61);
    for (int n = 0; n < 5; ++n) {
        const auto w = wigner_transform(fock_state(n, 12), grid);
        EXPECT_NEAR(w.values(30, 30), (n % 2 == 0 ? 1.0 : -1.0) / pi, 1e-10);
    }
}

TEST(Wigner, CoherentShiftedGaussian) {
    const cplx alpha(1.0, -0.5);
    const GridSpec grid = symmetric_grid(7.0, 71);
    const auto w = wigner_transform(coherent_state(alpha, 35), grid);
    const double q0 = std::sqrt(2.0) * alpha.real(), p0 = std::sqrt(2.0) * alpha.imag();
    for (int i = 5; i < 71; i += 11) {
        const double q = grid.q(i), p = grid.p(40);
        EXPECT_NEAR(w.values(40, i), std::exp(-(q - q0) * (q - q0) - (p - p0) * (p - p0)) / pi, 1e-8);
    }
}

TEST(Negativity, OracleValues) {
    const GridSpec grid = negativity_grid(35, 256);
    EXPECT_LT(state_negativity(coherent_state(cplx(1.0, 0.5), 35), grid), 1e-3);
    EXPECT_NEAR(state_negativity(fock_state(1, 35), grid), fock1_negativity_exact(), 0.01 * fock1_negativity_exact());
    const double oracle = cat_negativity_oracle(cplx(2.0, 0.0), +1);
    EXPECT_NEAR(state_negativity(cat_state(2.0, +1, 35), grid), oracle, 0.01 * oracle);
}

TEST(Negativity, CatOracleIndependentOfOrientation) {
    // rotating the cat in phase space leaves its negativity unchanged
    const double a = cat_negativity_oracle(cplx(2.0, 0.0), +1);
    const double b = cat_negativity_oracle(cplx(0.0, 2.0), +1);
    EXPECT_NEAR(a, b, 1e-3 * a);
}

TEST(Grid, TooSmallGridRejected) {
    EXPECT_THROW(wigner_transform(coherent_state(3.0, 40), symmetric_grid(2.0, 64)), GridTooSmallError);
    EXPECT_THROW((GridSpec{1.0, -1.0, -1.0, 1.0, 10, 10}.validate()), std::invalid_argument);
}

TEST(Statistics, TimeAverageAndBand) {
    std::vector<DeltaSeries> s = {{{0, 1, 2, 3}, {1, 2, 3, 4}}, {{0, 1, 2, 3}, {3, 4, 5, 6}}};
    const auto m = negativity_time_average(s, 2.0, 3.0);
    EXPECT_DOUBLE_EQ(m.mean, 4.5);  // per-trajectory 3.5 and 5.5
    EXPECT_DOUBLE_EQ(m.sem, 1.0);
    EXPECT_EQ(m.n, 2);
    EXPECT_THROW(negativity_time_average(s, 2.0, 5.0), std::invalid_argument);
    const auto band = ensemble_band(s);
    EXPECT_DOUBLE_EQ(band.mean[1], 3.0);
}

TEST(Statistics, DecayFitRecoversRate) {
    DeltaBand band;
    for (int k = 0; k < 40; ++k) {
        band.t.push_back(0.05 * k);
        band.mean.push_back(0.8 * std::exp(-1.7 * 0.05 * k));
        band.sem.push_back(0.0);
    }
    int used = 0;
    const auto fit = fit_decay(band, &used);
    EXPECT_NEAR(-fit.slope, 1.7, 1e-10);
    EXPECT_GE(used, 3);
}
