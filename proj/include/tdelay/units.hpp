#pragma once

#include <cmath>

namespace tdelay {

// Natural units for the lattice: hbar = m = d = 1.
namespace units {
inline constexpr double hbar = 1.0;
inline constexpr double mass = 1.0;
inline constexpr double spacing = 1.0;

/// On-site energy of every free chain site, hbar^2 / (m d^2).
inline constexpr double A = hbar * hbar / (mass * spacing * spacing);
/// Nearest-neighbour hopping of the chain, -hbar^2 / (2 m d^2). Negative.
inline constexpr double B = -hbar * hbar / (2.0 * mass * spacing * spacing);

static_assert(A == -2.0 * B);
}  // namespace units

/// Chain band energy at dimensionless wavenumber alpha = k d.
///
/// Evaluated as 2 sin^2(alpha/2) rather than A + 2B cos(alpha) so that small
/// alpha keeps full relative precision; the two agree identically.
inline double dispersion_energy(double alpha) {
    const double s = std::sin(0.5 * alpha);
    return 2.0 * s * s;
}

/// E_alpha / B. Coupling ratios g/B are compared against this.
inline double dispersion_over_B(double alpha) { return dispersion_energy(alpha) / units::B; }

/// Lattice group velocity dE/dalpha.
inline double group_velocity(double alpha) { return -2.0 * units::B * std::sin(alpha); }

}  // namespace tdelay
