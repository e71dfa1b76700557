#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "lattice.hpp"
#include "phase.hpp"

namespace tdelay {

/// One flat piece of a continuum potential: depth V/|B| and length in units of d.
struct WellSegment {
    double depth = 0.0;
    double length = 1.0;
};

/// Piecewise-constant potential on x > 0, segments listed left to right,
/// closed by an infinite wall after the last one. Free space for x < 0.
class WellSpec {
public:
    explicit WellSpec(std::vector<WellSegment> segments) : segments_(std::move(segments)) {
        if (segments_.empty()) throw InvalidArgument("well needs at least one segment");
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            if (!(segments_[i].length > 0.0) || !std::isfinite(segments_[i].length))
                throw InvalidArgument("well segment " + std::to_string(i) + " must have positive length");
            if (!std::isfinite(segments_[i].depth))
                throw InvalidArgument("well segment " + std::to_string(i) + " has a non-finite depth");
        }
    }

    static WellSpec single(double depth, double length = 1.0) { return WellSpec({{depth, length}}); }
    static WellSpec double_well(double depth0, double depth1, double length = 1.0) {
        return WellSpec({{depth0, length}, {depth1, length}});
    }

    const std::vector<WellSegment>& segments() const { return segments_; }
    double total_length() const {
        double l = 0.0;
        for (const auto& s : segments_) l += s.length;
        return l;
    }

    WellSpec with_depth(std::size_t segment, double depth) const {
        if (segment >= segments_.size()) throw InvalidArgument("segment index out of range");
        auto segs = segments_;
        segs[segment].depth = depth;
        return WellSpec(std::move(segs));
    }

private:
    std::vector<WellSegment> segments_;
};

struct WellPhase {
    double alpha = 0.0;
    cplx coefficient{-1.0, 0.0};  // R / A0
    double phase = std::numbers::pi;
};

namespace detail {

// Propagates (psi, psi') leftward by `length` through a region where
// psi'' = -q2 psi. Everything stays real: cos(q l), sin(q l)/q and q sin(q l)
// are even in q, and for q2 < 0 the hyperbolic forms are pre-scaled by
// e^{-kappa l}, which only rescales the state (the phase uses a ratio).
inline void propagate_left(double q2, double length, double& psi, double& dpsi) {
    double c, s_over_q, q_s;
    if (q2 >= 0.0) {
        const double q = std::sqrt(q2);
        const double z = q * length;
        c = std::cos(z);
        s_over_q = std::fabs(z) < 1e-4 ? length * (1.0 - z * z / 6.0) : std::sin(z) / q;
        q_s = q * std::sin(z);
    } else {
        const double kappa = std::sqrt(-q2);
        const double z = kappa * length;
        const double e2 = std::exp(-2.0 * z);
        c = 0.5 * (1.0 + e2);
        const double sh = 0.5 * (1.0 - e2);  // sinh(z) e^{-z}
        s_over_q = z < 1e-4 ? length * (1.0 + z * z / 6.0) * std::exp(-z) : sh / kappa;
        q_s = -kappa * sh;  // q sin(q l) with q = i kappa
    }
    // Backwards map: (psi, psi')(x - l) = [[c, -s/q], [q s, c]] (psi, psi')(x).
    const double p = c * psi - s_over_q * dpsi;
    const double dp = q_s * psi + c * dpsi;
    const double norm = std::fmax(std::fabs(p), std::fabs(dp));
    psi = p / norm;
    dpsi = dp / norm;
}

}  // namespace detail

/// Reflection coefficient R for a unit incoming wave e^{i alpha x}.
///
/// The wall condition psi = 0, psi' = 1 is carried leftward through each
/// segment (local wavenumber q^2 = alpha^2 - V/|B|) and matched at x = 0
/// against e^{i alpha x} + R e^{-i alpha x}.
inline WellPhase well_reflection_phase(const WellSpec& spec, double alpha) {
    if (!(alpha > 0.0)) throw InvalidArgument("well reflection needs alpha > 0");
    double psi = 0.0, dpsi = 1.0;
    const auto& segs = spec.segments();
    for (auto it = segs.rbegin(); it != segs.rend(); ++it)
        detail::propagate_left(alpha * alpha - it->depth, it->length, psi, dpsi);
    const cplx iau{0.0, alpha * psi};
    const cplx den = iau + dpsi;
    if (std::abs(den) < 1e-300) throw DegenerateMatch("matching denominator vanishes at x = 0");
    const cplx r = (iau - dpsi) / den;
    return {alpha, r, principal_phase(r)};
}

inline TimeDelay well_time_delay(const WellSpec& spec, double alpha0, double h) {
    if (!(alpha0 > 0.0)) throw InvalidArgument("well delay needs alpha0 > 0");
    const double slope =
        central_phase_derivative([&](double a) { return well_reflection_phase(spec, a).phase; }, alpha0, h);
    return TimeDelay::from_phase_slope(slope, alpha0);
}

inline TimeDelay well_time_delay(const WellSpec& spec, double alpha0) {
    return well_time_delay(spec, alpha0, default_phase_step(alpha0));
}

struct InterferenceDepths {
    std::vector<double> constructive;
    std::vector<double> destructive;
};

/// Thin-film interference depths V0/|B| for a well of length L:
/// constructive at (kL)^2 - (m + 1/2)^2 / 4, destructive at (kL)^2 - m^2 / 4.
inline InterferenceDepths interference_depths(double alpha, double length, const std::vector<int>& m_values) {
    if (!(length > 0.0)) throw InvalidArgument("interference depths need L > 0");
    const double kl = alpha * length;
    InterferenceDepths out;
    for (int m : m_values) {
        const double half = m + 0.5;
        out.constructive.push_back(kl * kl - half * half / 4.0);
        out.destructive.push_back(kl * kl - static_cast<double>(m) * m / 4.0);
    }
    return out;
}

enum class ExtremumKind { max, min };

inline const char* to_string(ExtremumKind k) { return k == ExtremumKind::max ? "max" : "min"; }

struct DelayExtremum {
    double depth = 0.0;
    double tau_star = 0.0;
    ExtremumKind kind = ExtremumKind::max;
};

struct ExtremaScan {
    std::vector<DelayExtremum> extrema;
    std::vector<double> failed_depths;
};

/// Scans tau* over the depth of one segment and returns the interior local
/// extrema, each refined by a three-point parabola through its grid
/// neighbours. Failed evaluations are skipped and listed.
inline ExtremaScan locate_delay_extrema(const WellSpec& spec_template, std::size_t free_segment, double alpha0,
                                        double depth_lo, double depth_hi, std::size_t grid_n) {
    if (grid_n < 100) throw InvalidArgument("extrema scan needs at least 100 grid points");
    if (!(depth_lo < depth_hi)) throw InvalidArgument("extrema scan needs depth_lo < depth_hi");
    if (free_segment >= spec_template.segments().size()) throw InvalidArgument("segment index out of range");

    auto tau_at = [&](double depth) {
        return well_time_delay(spec_template.with_depth(free_segment, depth), alpha0).tau_star;
    };

    ExtremaScan out;
    std::vector<double> xs, ys;
    xs.reserve(grid_n);
    ys.reserve(grid_n);
    const double step = (depth_hi - depth_lo) / static_cast<double>(grid_n - 1);
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double x = depth_lo + step * static_cast<double>(i);
        try {
            ys.push_back(tau_at(x));
            xs.push_back(x);
        } catch (const NumericalError&) {
            out.failed_depths.push_back(x);
        }
    }

    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        const double y0 = ys[i - 1], y1 = ys[i], y2 = ys[i + 1];
        const bool is_max = y1 > y0 && y1 >= y2;
        const bool is_min = y1 < y0 && y1 <= y2;
        if (!is_max && !is_min) continue;

        DelayExtremum ex{xs[i], y1, is_max ? ExtremumKind::max : ExtremumKind::min};
        const double x0 = xs[i - 1], x1 = xs[i], x2 = xs[i + 1];
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double curv = (d12 - d01) / (x2 - x0);
        if (curv != 0.0) {
            const double xv = 0.5 * (x0 + x1) - 0.5 * d01 / curv;
            if (xv > x0 && xv < x2) {
                try {
                    const double yv = tau_at(xv);
                    if ((is_max && yv >= y1) || (is_min && yv <= y1)) ex = {xv, yv, ex.kind};
                } catch (const NumericalError&) {
                }
            }
        }
        out.extrema.push_back(ex);
    }
    return out;
}

}  // namespace tdelay
