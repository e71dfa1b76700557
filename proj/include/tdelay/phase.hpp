#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "error.hpp"

namespace tdelay {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// arg(z) on the branch (-pi, pi].
inline double principal_phase(std::complex<double> z) {
    const double p = std::arg(z);
    return p <= -std::numbers::pi ? p + kTwoPi : p;
}

/// Shifts `delta` by the multiple of 2 pi that minimizes its magnitude.
inline double unwrap_difference(double delta) { return delta - kTwoPi * std::round(delta / kTwoPi); }

/// Default central-difference step for phase derivatives at alpha0.
inline double default_phase_step(double alpha0) { return 1e-6 * std::fmax(1.0, std::fabs(alpha0)); }

/// d(phase)/d(alpha) at alpha0 by central difference of a principal-branch
/// phase function. Each half of the stencil is unwrapped separately.
///
/// Throws StepTooLarge if either half moves the phase by pi/2 or more: the
/// step is then too coarse to tell which way the phase turned.
template <typename PhaseFn>
double central_phase_derivative(PhaseFn&& phase, double alpha0, double h) {
    if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    const double mid = phase(alpha0);
    const double left = unwrap_difference(mid - phase(alpha0 - h));
    const double right = unwrap_difference(phase(alpha0 + h) - mid);
    constexpr double kLimit = std::numbers::pi / 2.0;
    if (std::fabs(left) >= kLimit || std::fabs(right) >= kLimit)
        throw StepTooLarge("phase moves by pi/2 or more across half the stencil; reduce h");
    return (left + right) / (2.0 * h);
}

}  // namespace tdelay
