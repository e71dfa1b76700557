#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "cluster.hpp"
#include "dense.hpp"
#include "error.hpp"
#include "hamiltonian.hpp"
#include "phase.hpp"
#include "units.hpp"

namespace tdelay {

/// Resolvent mu(alpha) = (E_alpha I - G)^{-1} of the cluster block.
struct MuMatrix {
    double alpha = 0.0;
    CMatrix entries;  // mu_ij, energy^-1 units

    std::size_t size() const { return entries.rows(); }
    /// mu~_ij = B mu_ij (dimensionless).
    cplx scaled(std::size_t i, std::size_t j) const { return units::B * entries(i, j); }
};

/// Reflection coefficient e^{i phi} sampled at one wavenumber.
struct PhaseSample {
    double alpha = 0.0;
    cplx coefficient{-1.0, 0.0};
    double phase = std::numbers::pi;  // arg(coefficient) + 2 pi branch_offset
    int branch_offset = 0;
};

/// Dimensionless delay tau* and its scaled form tau*/t* = 2 alpha0 tau*.
///
/// tau*/t* is also the phase slope phi'(alpha0).
struct TimeDelay {
    double tau_star = 0.0;
    double tau_star_scaled = 0.0;
    double alpha0 = 0.0;

    static TimeDelay from_tau(double tau, double alpha0) { return {tau, 2.0 * alpha0 * tau, alpha0}; }
    static TimeDelay from_phase_slope(double slope, double alpha0) {
        return {slope / (2.0 * alpha0), slope, alpha0};
    }
    double phase_slope() const { return tau_star_scaled; }
};

inline MuMatrix mu_matrix(const ClusterMatrix& g, double alpha) {
    const std::size_t n = g.size();
    const double e = dispersion_energy(alpha);
    CMatrix p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = (i == j ? e : 0.0) - g.coupling(i, j);
    LuDecomposition lu(std::move(p), std::fmax(e, std::fabs(units::B) * g.ratios().max_abs()));
    if (lu.singular())
        throw SingularResolvent("E_alpha coincides with a cluster eigenvalue (alpha = " + std::to_string(alpha) + ")");
    return {alpha, lu.inverse()};
}

namespace detail {

// 1 - mu~00 e^{i alpha}; the reflection coefficient is -conj(d)/d.
inline cplx reflection_denominator(double mu00_scaled, double alpha) {
    return 1.0 - mu00_scaled * std::polar(1.0, alpha);
}

inline PhaseSample phase_from_mu(double mu00_scaled, double alpha) {
    const cplx d = reflection_denominator(mu00_scaled, alpha);
    if (std::abs(d) < 1e-300) throw DegeneratePhase("reflection denominator vanishes");
    const cplx r = -std::conj(d) / d;
    return {alpha, r, principal_phase(r), 0};
}

}  // namespace detail

/// e^{i phi(alpha)} from the resolvent entry mu~00 (real because mu is Hermitian).
inline PhaseSample reflection_coefficient(const ClusterMatrix& g, double alpha) {
    const MuMatrix mu = mu_matrix(g, alpha);
    return detail::phase_from_mu(mu.scaled(0, 0).real(), alpha);
}

namespace detail {

// tau* from the resolvent row of site 0, with `w` the weight of the
// sum |mu~0n|^2 in the numerator.
inline TimeDelay delay_from_row(const ClusterMatrix& g, double alpha0, double w) {
    if (alpha0 == 0.0) throw ZeroWavenumber();
    const MuMatrix mu = mu_matrix(g, alpha0);
    const double m00 = mu.scaled(0, 0).real();
    double row_norm = 0.0;
    for (std::size_t n = 0; n < mu.size(); ++n) row_norm += std::norm(mu.scaled(0, n));
    const double c = std::cos(alpha0);
    const double s = std::sin(alpha0);
    const double num = w * row_norm + m00 * c - m00 * m00;
    // (m00 - c)^2 + s^2 is bounded below by s^2; written that way it never cancels.
    const double den = alpha0 * ((m00 - c) * (m00 - c) + s * s);
    return TimeDelay::from_tau(num / den, alpha0);
}

}  // namespace detail

/// Closed-form delay phi'(alpha0) / (2 alpha0) from the resolvent row of site 0:
///
///   tau* = [2 sin^2(a) S + mu~00 cos(a) - mu~00^2] / (a (1 - 2 mu~00 cos(a) + mu~00^2))
///
/// with S = sum_n |mu~0n|^2, using d mu~00/d alpha = 2 sin(alpha) S.
inline TimeDelay time_delay_analytic(const ClusterMatrix& g, double alpha0) {
    const double s = std::sin(alpha0);
    return detail::delay_from_row(g, alpha0, 2.0 * s * s);
}

/// Variant with 2 alpha0 sin(alpha0) S in place of 2 sin^2(alpha0) S. It agrees
/// with time_delay_analytic to relative O(alpha0^2) and is kept for comparison.
inline TimeDelay time_delay_small_wavenumber(const ClusterMatrix& g, double alpha0) {
    return detail::delay_from_row(g, alpha0, 2.0 * alpha0 * std::sin(alpha0));
}

/// tau* from a central difference of the reflection phase.
inline TimeDelay time_delay_numeric(const ClusterMatrix& g, double alpha0, double h) {
    if (alpha0 == 0.0) throw ZeroWavenumber();
    const double slope =
        central_phase_derivative([&](double a) { return reflection_coefficient(g, a).phase; }, alpha0, h);
    return TimeDelay::from_phase_slope(slope, alpha0);
}

inline TimeDelay time_delay_numeric(const ClusterMatrix& g, double alpha0) {
    return time_delay_numeric(g, alpha0, default_phase_step(alpha0));
}

/// Closed-form delay for a single cluster site with coupling ratio g00/B.
inline TimeDelay one_site_delay(double g00_over_B, double alpha0) {
    if (alpha0 == 0.0) throw ZeroWavenumber();
    if (std::isinf(g00_over_B)) return TimeDelay::from_tau(0.0, alpha0);
    const double x = 2.0 + g00_over_B;
    const double c = std::cos(alpha0);
    const double tau = (1.0 - x * c) / (alpha0 * (1.0 - 2.0 * x * c + x * x));
    return TimeDelay::from_tau(tau, alpha0);
}

struct OneSiteExtrema {
    double alpha0 = 0.0;
    double g_max_over_B = 0.0;
    double tau_max = 0.0;
    double g_min_over_B = 0.0;
    double tau_min = 0.0;
};

/// Location and value of the one-site delay maximum and minimum in g00/B.
/// Valid for 0 < alpha0 < pi/2.
///
/// With C = cos(alpha0), sqrt(1/C^2 - 1) = tan(alpha0) and 1/C - C =
/// sin(alpha0) tan(alpha0); those forms are used to avoid cancellation.
inline OneSiteExtrema one_site_extrema(double alpha0) {
    if (alpha0 == 0.0) throw ZeroWavenumber();
    if (!(alpha0 > 0.0 && alpha0 < 0.5 * std::numbers::pi))
        throw InvalidArgument("one-site extrema need 0 < alpha0 < pi/2");
    const double c = std::cos(alpha0);
    const double s = std::sin(alpha0);
    const double t = std::tan(alpha0);
    OneSiteExtrema out;
    out.alpha0 = alpha0;
    out.g_max_over_B = 1.0 / c - 2.0 - t;
    out.g_min_over_B = 1.0 / c - 2.0 + t;
    out.tau_max = c / (2.0 * alpha0 * t * (1.0 - s));
    out.tau_min = -c / (2.0 * alpha0 * t * (1.0 + s));
    return out;
}

/// Cluster amplitudes beta of the scattering eigenstate, normalised so the
/// incoming chain wave is e^{i alpha n}.
inline std::vector<cplx> cluster_amplitudes(const ClusterMatrix& g, double alpha) {
    const MuMatrix mu = mu_matrix(g, alpha);
    const PhaseSample ph = detail::phase_from_mu(mu.scaled(0, 0).real(), alpha);
    const cplx psi_m1 = std::polar(1.0, -alpha) + std::polar(1.0, alpha) * ph.coefficient;
    std::vector<cplx> beta(g.size());
    for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = units::B * psi_m1 * mu.entries(i, 0);
    return beta;
}

/// max |(H - E_alpha) Psi| of the scattering eigenstate truncated to chain
/// sites -M..-1, skipping the two outermost chain rows.
///
/// `phase_shift` perturbs phi in the chain part only; non-zero values give a
/// state that should fail the check.
inline double eigenstate_residual(const ClusterMatrix& g, double alpha, std::size_t window,
                                  double phase_shift = 0.0) {
    if (window < 3) throw InvalidArgument("eigenstate window must be at least 3 sites");
    const FiniteHamiltonian h(window, g);
    const PhaseSample ph = reflection_coefficient(g, alpha);
    const cplx reflected = ph.coefficient * std::polar(1.0, phase_shift);
    const std::vector<cplx> beta = cluster_amplitudes(g, alpha);

    std::vector<cplx> psi(h.dimension());
    for (long n = -static_cast<long>(window); n <= -1; ++n) {
        const double an = alpha * static_cast<double>(n);
        psi[h.chain_index(n)] = std::polar(1.0, an) + std::polar(1.0, -an) * reflected;
    }
    for (std::size_t j = 0; j < beta.size(); ++j) psi[h.cluster_index(j)] = beta[j];

    const auto hpsi = h.apply(psi);
    const double e = dispersion_energy(alpha);
    double worst = 0.0;
    for (std::size_t i = 2; i < psi.size(); ++i) worst = std::fmax(worst, std::abs(hpsi[i] - e * psi[i]));
    return worst;
}

}  // namespace tdelay
