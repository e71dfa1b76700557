#include <cmath>

#include <gtest/gtest.h>

#include <tdelay/hamiltonian.hpp>
#include <tdelay/lattice.hpp>
#include <tdelay/wavepacket.hpp>

using namespace tdelay;

namespace {

SimConfig base_config() {
    SimConfig c;
    c.chain_length = 1200;
    c.alpha0 = 0.5;
    c.center = -600;
    c.width = 40.0;
    c.total_time = 2600.0;
    c.sample_interval = 2.0;
    return c;
}

TEST(Hamiltonian, BareChainIsTridiagonal) {
    const auto h = build_hamiltonian(3, std::nullopt).dense();
    ASSERT_EQ(h.rows(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const double expect = i == j ? 1.0 : (i + 1 == j || j + 1 == i ? -0.5 : 0.0);
            EXPECT_EQ(h(i, j), cplx(expect));
        }
}

TEST(Hamiltonian, ClusterLink) {
    const auto h = build_hamiltonian(2, ClusterMatrix::one_site(0.0)).dense();
    ASSERT_EQ(h.rows(), 3u);
    EXPECT_EQ(h(1, 2), cplx(-0.5));
    EXPECT_EQ(h(2, 1), cplx(-0.5));
    EXPECT_EQ(h(2, 2), cplx(0.0));
    EXPECT_EQ(h(0, 2), cplx(0.0));
}

TEST(Hamiltonian, ExactlyHermitian) {
    const auto g = ClusterMatrix(CMatrix{{1.0, cplx(0.3, 0.7), 0.2}, {cplx(0.3, -0.7), -2.0, cplx(0, 1)}, {0.2, cplx(0, -1), 0.5}});
    const auto h = build_hamiltonian(6, g).dense();
    EXPECT_EQ(h.hermitian_defect().first, 0.0);
    const auto [lo, hi] = build_hamiltonian(6, g).spectral_bounds();
    EXPECT_LE(lo, 0.0);
    EXPECT_GE(hi, 2.0);
}

TEST(SimConfig, Invariants) {
    auto c = base_config();
    EXPECT_NO_THROW(c.validate());
    c.width = 4.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = base_config();
    c.center = -1100;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = base_config();
    c.alpha0 = 0.2;  // alpha0 sigma = 8
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = base_config();
    c.center = 5;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Evolve, FreeChainMovesAtGroupVelocity) {
    auto c = base_config();
    c.total_time = 600.0;
    const auto traj = evolve(c);
    std::vector<double> t, x;
    for (const auto& s : traj.samples)
        if (s.t >= 50.0 && s.t <= 550.0) {
            t.push_back(s.t);
            x.push_back(s.center);
        }
    const auto fit = fit_line(t, x);
    EXPECT_NEAR(fit.slope, std::sin(0.5), 0.01 * std::sin(0.5));
}

TEST(Evolve, UnitaryAndEnergyConserving) {
    auto c = base_config();
    c.cluster = ClusterMatrix::two_site(-1.45, 0.3, -0.5);
    const auto traj = evolve(c);
    const double e0 = traj.samples.front().energy;
    for (const auto& s : traj.samples) {
        EXPECT_LE(std::fabs(s.norm - 1.0), c.norm_drift_budget);
        EXPECT_NEAR(s.energy, e0, 1e-8 * std::fabs(e0));
    }
}

TEST(Evolve, FullReflectionAfterDeparture) {
    auto c = base_config();
    c.cluster = ClusterMatrix::one_site(3.0);
    const auto traj = evolve(c);
    EXPECT_GE(traj.samples.back().chain_fraction, 0.99);
    EXPECT_LT(traj.samples.back().center, -400.0);
}

TEST(Evolve, BoundaryContamination) {
    auto c = base_config();
    c.chain_length = 300;
    c.center = -100;
    c.total_time = 1200.0;
    EXPECT_THROW(evolve(c), BoundaryContamination);
}

TEST(FitDelay, ReferenceAgainstItself) {
    const auto ref = evolve(base_config());
    const auto f = fit_delay(ref, ref, 0.5);
    EXPECT_LE(std::fabs(f.tau_sim), 2.0 * ref.config.sample_interval);
    EXPECT_EQ(f.phase_slope, 0.0);
}

TEST(FitDelay, OneSiteMatchesPhaseSlope) {
    auto c = base_config();
    const auto ref = evolve(c);
    c.cluster = ClusterMatrix::one_site(-1.01);
    const auto f = fit_delay(evolve(c), ref, 0.5);
    const double slope = time_delay_numeric(*c.cluster, 0.5).phase_slope();
    EXPECT_NEAR(f.phase_slope, slope, 1e-12);
    EXPECT_LE(std::fabs(f.tau_sim * f.group_velocity - slope) / std::fabs(slope), 0.10);
    EXPECT_NEAR(std::fabs(f.v_out), std::fabs(f.v_in), 0.02 * std::fabs(f.v_in));
    EXPECT_LE(f.rms_in, 0.5);
    EXPECT_LE(f.rms_out, 0.5);
}

TEST(FitDelay, DetunedTwoSiteResonanceDelaysLonger) {
    auto c = base_config();
    const auto ref = evolve(c);
    c.cluster = ClusterMatrix::one_site(-1.01);
    const auto one = fit_delay(evolve(c), ref, 0.5);
    c.cluster = ClusterMatrix::two_site(-1.45, 0.3, -0.5);
    const auto two = fit_delay(evolve(c), ref, 0.5);
    EXPECT_GT(time_delay_analytic(*c.cluster, 0.5).tau_star, time_delay_analytic(ClusterMatrix::one_site(-1.01), 0.5).tau_star);
    EXPECT_GT(two.tau_sim, one.tau_sim);
    EXPECT_LE(std::fabs(two.tau_sim - two.predicted_delay) / std::fabs(two.predicted_delay), 0.10);
}

TEST(FitDelay, ConvergesUnderRefinement) {
    auto c = base_config();
    c.cluster = ClusterMatrix::one_site(-1.01);
    SimConfig ref_c = c;
    ref_c.cluster.reset();
    const auto coarse = fit_delay(evolve(c), evolve(ref_c), 0.5);

    c.chain_length *= 2;
    c.sample_interval /= 2;
    ref_c.chain_length *= 2;
    ref_c.sample_interval /= 2;
    const auto fine = fit_delay(evolve(c), evolve(ref_c), 0.5);
    // Quoted uncertainty: fit rms over speed, in time units.
    const double uncertainty = (coarse.rms_out + coarse.rms_in) / std::fabs(coarse.v_out) + 1e-3;
    EXPECT_LE(std::fabs(fine.tau_sim - coarse.tau_sim), uncertainty);
}

TEST(FitDelay, NeedsLinearLegs) {
    auto c = base_config();
    c.total_time = 400.0;  // packet never reaches the wall
    const auto t = evolve(c);
    EXPECT_THROW(fit_delay(t, t, 0.5), NoLinearRegime);
}

}  // namespace
