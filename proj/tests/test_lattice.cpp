#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <tdelay/lattice.hpp>

#include "oracles.hpp"

using namespace tdelay;

namespace {

constexpr double kPi = std::numbers::pi;

TEST(Units, ChainConstants) {
    EXPECT_EQ(units::A, 1.0);
    EXPECT_EQ(units::B, -0.5);
    EXPECT_EQ(units::A, -2.0 * units::B);
}

TEST(Dispersion, KnownValues) {
    EXPECT_EQ(dispersion_energy(0.0), 0.0);
    EXPECT_NEAR(dispersion_energy(kPi), 2.0, 1e-15);
    EXPECT_NEAR(dispersion_energy(0.01), 4.999958333472222e-05, 1e-19);
}

TEST(Dispersion, SmallAlphaIsFreeParticle) {
    for (double a : {1e-3, 1e-2, 5e-2}) EXPECT_NEAR(dispersion_energy(a), a * a / 2.0, a * a * a * a / 20.0);
}

TEST(ClusterMatrix, RejectsNonHermitian) {
    try {
        ClusterMatrix bad(CMatrix{{0.0, cplx(1.0, 0.0)}, {cplx(0.0, 1.0), 0.0}});
        FAIL() << "expected NonHermitian";
    } catch (const NonHermitian& e) {
        EXPECT_EQ(e.row, 0u);
        EXPECT_EQ(e.col, 1u);
    }
    EXPECT_THROW(ClusterMatrix(CMatrix{{cplx(1.0, 1e-6)}}), NonHermitian);
    EXPECT_THROW(ClusterMatrix(CMatrix(0, 0)), InvalidArgument);
    EXPECT_THROW(ClusterMatrix(CMatrix(2, 3)), InvalidArgument);
}

TEST(ClusterMatrix, UpperTriangle) {
    const std::vector<double> p{1.0, 2.0, 3.0};
    const auto g = ClusterMatrix::from_upper_triangle(p);
    EXPECT_EQ(g.size(), 2u);
    EXPECT_EQ(g.ratio(1, 0), cplx(2.0));
    EXPECT_EQ(g.coupling(1, 1), cplx(-1.5));
    const std::vector<double> bad{1.0, 2.0};
    EXPECT_THROW(ClusterMatrix::from_upper_triangle(bad), InvalidArgument);
}

TEST(MuMatrix, OneSiteClosedForm) {
    const auto mu = mu_matrix(ClusterMatrix::one_site(0.0), 0.01);
    EXPECT_NEAR(mu.scaled(0, 0).real(), -10000.083333750002, 1e-7);
    EXPECT_NEAR(mu.scaled(0, 0).real(), 1.0 / (2.0 * std::cos(0.01) - 2.0), 1e-7);
}

TEST(MuMatrix, SingularWhenEnergyMatchesSite) {
    // g00 = E_alpha exactly, so P = 0.
    const double alpha = 0.7;
    const double g00_over_B = dispersion_energy(alpha) / units::B;
    EXPECT_THROW(mu_matrix(ClusterMatrix::one_site(g00_over_B), alpha), SingularResolvent);
    EXPECT_THROW(reflection_coefficient(ClusterMatrix::one_site(g00_over_B), alpha), SingularResolvent);
}

TEST(MuMatrix, TwoSiteMatchesExplicitInverse) {
    const cplx g01(0.3, -1.2);
    const auto mu = mu_matrix(ClusterMatrix::two_site(0.4, g01, -2.5), 0.3);
    const auto ref = oracle::two_site_mu(0.4, g01, -2.5, 0.3);
    EXPECT_LT(std::abs(mu.entries(0, 0) - ref.m00), 1e-12);
    EXPECT_LT(std::abs(mu.entries(0, 1) - ref.m01), 1e-12);
    EXPECT_LT(std::abs(mu.entries(1, 0) - ref.m10), 1e-12);
    EXPECT_LT(std::abs(mu.entries(1, 1) - ref.m11), 1e-12);
}

TEST(MuMatrix, ResidualAndHermitianRandom) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 7;
        const auto g = oracle::random_cluster(rng, n);
        const double alpha = 0.05 + 3.0 * (trial % 17) / 17.0;
        const auto mu = mu_matrix(g, alpha);
        CMatrix p(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) p(i, j) = (i == j ? dispersion_energy(alpha) : 0.0) - g.coupling(i, j);
        const CMatrix prod = p * mu.entries;
        EXPECT_LT((prod - CMatrix::identity(n)).max_abs(), 1e-10);
        EXPECT_LT(mu.entries.hermitian_defect().first, 1e-10);
    }
}

TEST(Reflection, HardWallLimit) {
    const auto ph = reflection_coefficient(ClusterMatrix::one_site(1e9), 0.2);
    EXPECT_NEAR(ph.coefficient.real(), -1.0, 1e-8);
    EXPECT_NEAR(std::fabs(ph.phase), kPi, 1e-8);
}

TEST(Reflection, OneSiteZeroCoupling) {
    const auto ph = reflection_coefficient(ClusterMatrix::one_site(0.0), 0.01);
    EXPECT_NEAR(ph.phase, 3.1215946533398304, 1e-12);
    EXPECT_NEAR(ph.phase, kPi - 0.02, 1e-4);
    EXPECT_EQ(ph.branch_offset, 0);
}

TEST(Reflection, UnimodularRandom) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto g = oracle::random_cluster(rng, 1 + trial % 7, 10.0);
        const double alpha = std::uniform_real_distribution<double>(1e-3, kPi - 1e-3)(rng);
        const auto ph = reflection_coefficient(g, alpha);
        EXPECT_NEAR(std::abs(ph.coefficient), 1.0, 1e-12);
        EXPECT_GT(ph.phase, -kPi);
        EXPECT_LE(ph.phase, kPi);
        EXPECT_NEAR(std::arg(ph.coefficient), oracle::wrap(ph.phase), 1e-15);
    }
}

TEST(TimeDelay, ScaledIsTwoAlphaTau) {
    const auto d = TimeDelay::from_tau(3.5, 0.2);
    EXPECT_EQ(d.tau_star_scaled, 2.0 * 0.2 * 3.5);
}

TEST(TimeDelay, OneSiteZeroCoupling) {
    const auto d = time_delay_analytic(ClusterMatrix::one_site(0.0), 0.01);
    EXPECT_NEAR(d.tau_star, -99.97000624869944, 1e-9);
    EXPECT_NEAR(d.tau_star_scaled, -1.9994001249739887, 1e-12);
}

TEST(TimeDelay, AtOneSiteMaximum) {
    const auto d = time_delay_analytic(ClusterMatrix::one_site(-1.0099503), 0.01);
    EXPECT_NEAR(d.tau_star, 5050.0833342806, 1e-6);
    EXPECT_NEAR(d.tau_star_scaled, 101.0, 0.01);
}

TEST(TimeDelay, ZeroWavenumberRejected) {
    EXPECT_THROW(time_delay_analytic(ClusterMatrix::one_site(1.0), 0.0), ZeroWavenumber);
    EXPECT_THROW(time_delay_numeric(ClusterMatrix::one_site(1.0), 0.0), ZeroWavenumber);
    EXPECT_THROW(one_site_delay(1.0, 0.0), ZeroWavenumber);
    EXPECT_THROW(one_site_extrema(0.0), ZeroWavenumber);
}

TEST(TimeDelay, GaugeInvarianceOfOffDiagonalPhase) {
    for (double theta : {0.3, 1.0, 2.5, -2.0}) {
        const auto a = time_delay_analytic(ClusterMatrix::two_site(0.7, 1.3, -0.4), 0.3);
        const auto b = time_delay_analytic(ClusterMatrix::two_site(0.7, std::polar(1.3, theta), -0.4), 0.3);
        EXPECT_TRUE(oracle::rel_close(a.tau_star, b.tau_star, 1e-12)) << a.tau_star << " vs " << b.tau_star;
    }
}

TEST(TimeDelay, NumericMatchesAnalyticOneSite) {
    const auto g = ClusterMatrix::one_site(0.0);
    const auto a = time_delay_analytic(g, 0.01);
    const auto n = time_delay_numeric(g, 0.01, 1e-6);
    EXPECT_TRUE(oracle::rel_close(a.tau_star, n.tau_star, 1e-6));
}

TEST(TimeDelay, SmallWavenumberVariantDiffersAtOrderAlphaSquared) {
    const auto g = ClusterMatrix::two_site(-1.3, cplx(0.4, 0.2), 0.7);
    for (double a : {0.001, 0.01, 0.3, 1.0}) {
        const double exact = time_delay_analytic(g, a).tau_star;
        const double approx = time_delay_small_wavenumber(g, a).tau_star;
        EXPECT_TRUE(oracle::rel_close(exact, time_delay_numeric(g, a).tau_star, 1e-7, 1e-9));
        EXPECT_LE(std::fabs(approx - exact), a * a * std::fabs(exact) + 1e-12) << a;
    }
    EXPECT_GT(std::fabs(time_delay_small_wavenumber(g, 1.0).tau_star - time_delay_analytic(g, 1.0).tau_star), 1e-3);
}

TEST(TimeDelay, NumericHardWallIsZero) {
    EXPECT_NEAR(time_delay_numeric(ClusterMatrix::one_site(1e9), 0.3).tau_star, 0.0, 1e-6);
}

TEST(TimeDelay, NumericStepTooLarge) {
    // Sharp resonance: the phase winds by ~2 pi over a stencil this wide.
    const auto g = ClusterMatrix::two_site(4.3445, 0.2172918414991763, 0.008733615838984361);
    EXPECT_THROW(time_delay_numeric(g, 0.01, 0.05), StepTooLarge);
    EXPECT_THROW(time_delay_numeric(g, 0.01, -1.0), InvalidArgument);
}

TEST(TimeDelay, NumericMatchesAnalyticRandomTwoSite) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const auto g = oracle::random_cluster(rng, 2);
        const auto a = time_delay_analytic(g, 0.3);
        const auto n = time_delay_numeric(g, 0.3);
        EXPECT_TRUE(oracle::rel_close(a.tau_star, n.tau_star, 1e-6, 1e-9)) << a.tau_star << " vs " << n.tau_star;
    }
}

TEST(TimeDelay, ResolventDerivativeIdentity) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 7;
        const auto g = oracle::random_cluster(rng, n);
        const double alpha = 0.2 + 0.1 * (trial % 10);
        const double h = 1e-7;
        const double fd =
            (mu_matrix(g, alpha + h).entries(0, 0).real() - mu_matrix(g, alpha - h).entries(0, 0).real()) / (2 * h);
        const auto mu = mu_matrix(g, alpha);
        double row = 0.0;
        for (std::size_t k = 0; k < n; ++k) row += std::norm(mu.entries(0, k));
        const double identity = 2.0 * units::B * std::sin(alpha) * row;
        EXPECT_TRUE(oracle::rel_close(fd, identity, 1e-6, 1e-12)) << fd << " vs " << identity;
    }
}

TEST(OneSite, ClosedFormMatchesGeneral) {
    for (double g : {-3.0, -1.01, -0.5, 0.0, 0.3, 4.0}) {
        for (double a : {0.01, 0.3, 1.0}) {
            const double closed = one_site_delay(g, a).tau_star;
            EXPECT_TRUE(oracle::rel_close(closed, time_delay_analytic(ClusterMatrix::one_site(g), a).tau_star, 1e-12));
            EXPECT_TRUE(oracle::rel_close(closed, oracle::one_site_tau(g, a), 1e-10));
        }
    }
    EXPECT_NEAR(one_site_delay(0.0, 0.01).tau_star, -99.97000624869944, 1e-9);
}

TEST(OneSite, HardWallLimits) {
    EXPECT_EQ(one_site_delay(std::numeric_limits<double>::infinity(), 0.01).tau_star, 0.0);
    EXPECT_EQ(one_site_delay(-std::numeric_limits<double>::infinity(), 0.01).tau_star, 0.0);
    EXPECT_LT(std::fabs(one_site_delay(1e12, 0.01).tau_star), 1e-8);
    EXPECT_LT(std::fabs(one_site_delay(-1e12, 0.01).tau_star), 1e-8);
}

TEST(OneSite, ExtremaFrozenValues) {
    const auto ex = one_site_extrema(0.01);
    EXPECT_NEAR(ex.g_max_over_B, -1.0099503312632491, 1e-13);
    EXPECT_NEAR(ex.tau_max, 5050.083334305566, 1e-8);
    EXPECT_NEAR(ex.g_min_over_B, -0.98994966456991473, 1e-13);
    EXPECT_NEAR(ex.tau_min, -4950.083334305566, 1e-8);
}

TEST(OneSite, ExtremaAgreeWithDenseScan) {
    for (double a : {0.01, 0.1, 0.5, 1.2}) {
        const auto ex = one_site_extrema(a);
        EXPECT_TRUE(oracle::rel_close(one_site_delay(ex.g_max_over_B, a).tau_star, ex.tau_max, 1e-9));
        EXPECT_TRUE(oracle::rel_close(one_site_delay(ex.g_min_over_B, a).tau_star, ex.tau_min, 1e-9));
        // Coarse brute-force oracle: nothing on a fine grid beats them.
        double hi = -1e300, lo = 1e300;
        for (int i = 0; i <= 200000; ++i) {
            const double g = -4.0 + 6.0 * i / 200000.0;
            const double t = oracle::one_site_tau(g, a);
            hi = std::fmax(hi, t);
            lo = std::fmin(lo, t);
        }
        EXPECT_LE(hi, ex.tau_max * (1 + 1e-9));
        EXPECT_GE(lo, ex.tau_min * (1 + 1e-9));
    }
}

TEST(OneSite, ExtremaDomain) {
    EXPECT_THROW(one_site_extrema(-0.1), InvalidArgument);
    EXPECT_THROW(one_site_extrema(2.0), InvalidArgument);
}

TEST(ClusterAmplitudes, BoundaryCondition) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = oracle::random_cluster(rng, 1 + trial % 7);
        const double alpha = 0.05 + 0.15 * (trial % 20);
        const auto beta = cluster_amplitudes(g, alpha);
        const auto ph = reflection_coefficient(g, alpha);
        EXPECT_LT(std::abs(beta[0] - (1.0 + ph.coefficient)), 1e-10);
    }
}

TEST(ClusterAmplitudes, HardWall) {
    const auto beta = cluster_amplitudes(ClusterMatrix::one_site(1e9), 0.4);
    EXPECT_LT(std::abs(beta[0]), 1e-8);
}

TEST(ClusterAmplitudes, SolveClusterRows) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 6;
        const auto g = oracle::random_cluster(rng, n);
        const double alpha = 0.5;
        const auto beta = cluster_amplitudes(g, alpha);
        const auto ph = reflection_coefficient(g, alpha);
        const cplx psi_m1 = std::polar(1.0, -alpha) + std::polar(1.0, alpha) * ph.coefficient;
        for (std::size_t i = 0; i < n; ++i) {
            cplx lhs = dispersion_energy(alpha) * beta[i];
            for (std::size_t j = 0; j < n; ++j) lhs -= g.coupling(i, j) * beta[j];
            const cplx rhs = i == 0 ? units::B * psi_m1 : cplx{};
            EXPECT_LT(std::abs(lhs - rhs), 1e-10);
        }
    }
}

TEST(EigenstateResidual, RandomClusterInterior) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = oracle::random_cluster(rng, 3);
        EXPECT_LE(eigenstate_residual(g, 0.3, 50), 1e-10);
    }
}

TEST(EigenstateResidual, HardWall) {
    for (std::size_t m : {3u, 10u, 80u}) EXPECT_LE(eigenstate_residual(ClusterMatrix::one_site(1e9), 0.3, m), 1e-10);
}

TEST(EigenstateResidual, WrongPhaseIsCaught) {
    std::mt19937_64 rng(4);
    const auto g = oracle::random_cluster(rng, 3);
    EXPECT_GE(eigenstate_residual(g, 0.3, 50, 0.1), 1e-3);
    EXPECT_THROW(eigenstate_residual(g, 0.3, 2), InvalidArgument);
}

}  // namespace
