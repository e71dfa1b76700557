#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "units.hpp"

namespace tdelay {

struct Peak {
    double location = 0.0;
    double value = 0.0;
};

/// Maximum of a scalar function inside [lo, hi]: grid scan, then
/// golden-section refinement between the neighbours of the best grid point.
/// Evaluations that throw NumericalError count as -inf.
template <typename Fn>
Peak find_peak(Fn&& fn, double lo, double hi, double refine_tol, std::size_t grid_n = 20001) {
    if (!(lo < hi)) throw InvalidArgument("peak bracket needs lo < hi");
    if (!(refine_tol > 0.0)) throw InvalidArgument("refine tolerance must be positive");
    if (grid_n < 3) throw InvalidArgument("peak scan needs at least 3 grid points");

    auto eval = [&](double x) {
        try {
            const double v = fn(x);
            return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
        } catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    const double step = (hi - lo) / static_cast<double>(grid_n - 1);
    std::vector<double> ys(grid_n);
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid_n; ++i) {
        ys[i] = eval(lo + step * static_cast<double>(i));
        if (ys[i] > ys[best]) best = i;
    }
    if (best == 0 || best + 1 == grid_n || !(ys[best] > ys[best - 1]) || !(ys[best] >= ys[best + 1]) ||
        !std::isfinite(ys[best]))
        throw NoPeakInBracket("no interior maximum in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

    double a = lo + step * static_cast<double>(best - 1);
    double b = lo + step * static_cast<double>(best + 1);
    Peak out{lo + step * static_cast<double>(best), ys[best]};

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c), fd = eval(d);
    while (b - a > refine_tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
        // Interval stopped shrinking in floating point.
        if (c == d) break;
    }
    if (fc > out.value) out = {c, fc};
    if (fd > out.value) out = {d, fd};
    return out;
}

struct CouplingPeak {
    double g00_over_B = 0.0;
    TimeDelay delay;
};

/// Peak of tau* along g00/B for a two-site cluster with fixed g01/B, g11/B.
inline CouplingPeak find_peak_1d(double g01_over_B, double g11_over_B, double alpha0, std::pair<double, double> bracket,
                                 double refine_tol, std::size_t grid_n = 20001) {
    if (alpha0 == 0.0) throw ZeroWavenumber();
    auto tau = [&](double g00) {
        return time_delay_analytic(ClusterMatrix::two_site(g00, g01_over_B, g11_over_B), alpha0).tau_star;
    };
    const Peak p = find_peak(tau, bracket.first, bracket.second, refine_tol, grid_n);
    return {p.location, TimeDelay::from_tau(p.value, alpha0)};
}

/// g00/B at which det(E_alpha I - G) vanishes for the two-site cluster:
/// E_alpha/B - (g01/B)^2 / (E_alpha/B - g11/B).
inline double two_site_resonance(double g01_over_B, double g11_over_B, double alpha0) {
    const double e = dispersion_over_B(alpha0);
    return e - g01_over_B * g01_over_B / (e - g11_over_B);
}

/// Exact arg-max in g00/B of the two-site tau*.
///
/// With z = 1/mu~00 = E/B - g00/B - (g01/B)^2/(E/B - g11/B) and
/// kappa = (g01/B)/(E/B - g11/B) independent of g00, tau* is proportional to
/// (K + C z)/(z^2 - 2 C z + 1) with K = 2 sin^2(alpha0)(1 + kappa^2) - 1;
/// its stationary points solve C z^2 + 2 K z - C (1 + 2K) = 0.
inline double two_site_peak_location(double g01_over_B, double g11_over_B, double alpha0) {
    const double e = dispersion_over_B(alpha0);
    const double kappa = g01_over_B / (e - g11_over_B);
    const double c = std::cos(alpha0);
    const double sn = std::sin(alpha0);
    const double k = 2.0 * sn * sn * (1.0 + kappa * kappa) - 1.0;
    const double disc = std::sqrt(k * k + c * c * (1.0 + 2.0 * k));
    auto f = [&](double z) { return (k + c * z) / (z * z - 2.0 * c * z + 1.0); };
    // Roots written to avoid cancellation between -k and the square root.
    const double q = -(k + std::copysign(disc, k));
    const double z1 = q / c;
    const double z2 = -c * (1.0 + 2.0 * k) / q;
    const double z = f(z1) >= f(z2) ? z1 : z2;
    return two_site_resonance(g01_over_B, g11_over_B, alpha0) - z;
}

}  // namespace tdelay
