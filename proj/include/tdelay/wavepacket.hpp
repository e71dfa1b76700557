#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "error.hpp"
#include "hamiltonian.hpp"
#include "lattice.hpp"
#include "units.hpp"

namespace tdelay {

struct SimConfig {
    std::size_t chain_length = 1200;      // chain sites -M..-1
    std::optional<ClusterMatrix> cluster;  // none: bare chain, Dirichlet after site -1
    double alpha0 = 0.5;
    long center = -600;  // initial packet centre n_c
    double width = 40.0;  // sigma of |psi|^2, in sites
    double total_time = 2600.0;
    double sample_interval = 2.0;
    double norm_drift_budget = 1e-8;

    void validate() const {
        if (chain_length < 3) throw InvalidArgument("chain needs at least 3 sites");
        if (width < 5.0) throw InvalidArgument("packet width sigma must be at least 5 sites");
        if (center >= 0) throw InvalidArgument("packet centre must be a chain site (negative)");
        if (static_cast<double>(-center) + 5.0 * width > static_cast<double>(chain_length))
            throw InvalidArgument("packet must start at least 5 sigma inside the chain");
        if (alpha0 * width < 10.0)
            throw InvalidArgument("alpha0 * sigma must be at least 10 for a narrow momentum spread");
        if (!(sample_interval > 0.0) || !(total_time > 0.0))
            throw InvalidArgument("sample interval and total time must be positive");
        if (!(norm_drift_budget > 0.0)) throw InvalidArgument("norm drift budget must be positive");
    }
};

struct TrajectorySample {
    double t = 0.0;
    double center = 0.0;  // X over chain sites
    double norm = 1.0;
    double chain_fraction = 1.0;
    double cluster_fraction = 0.0;
    double energy = 0.0;
};

struct Trajectory {
    SimConfig config;
    std::vector<TrajectorySample> samples;
};

/// exp(-i H dt) applied by a Chebyshev expansion on the Gershgorin interval.
class ChebyshevPropagator {
public:
    ChebyshevPropagator(const FiniteHamiltonian& h, double dt) : h_(h) {
        const auto [lo, hi] = h.spectral_bounds();
        half_width_ = 0.5 * (hi - lo) * 1.01 + 1e-12;
        mid_ = 0.5 * (hi + lo);
        const double x = half_width_ * dt;
        const cplx minus_i{0.0, -1.0};
        cplx ik = 1.0;
        for (std::size_t k = 0;; ++k) {
            const double j = std::cyl_bessel_j(static_cast<double>(k), x);
            coeffs_.push_back((k == 0 ? 1.0 : 2.0) * ik * j);
            ik *= minus_i;
            if (static_cast<double>(k) > x + 10.0 && std::fabs(j) < 1e-17) break;
        }
        phase_ = std::polar(1.0, -mid_ * dt);
    }

    std::size_t order() const { return coeffs_.size(); }

    void step(std::vector<cplx>& psi) const {
        const std::size_t n = psi.size();
        std::vector<cplx> prev = psi, cur(n), next(n), acc(n);
        for (std::size_t i = 0; i < n; ++i) acc[i] = coeffs_[0] * prev[i];
        scaled_apply(prev, cur);
        for (std::size_t i = 0; i < n; ++i) acc[i] += coeffs_[1] * cur[i];
        for (std::size_t k = 2; k < coeffs_.size(); ++k) {
            scaled_apply(cur, next);
            for (std::size_t i = 0; i < n; ++i) {
                next[i] = 2.0 * next[i] - prev[i];
                acc[i] += coeffs_[k] * next[i];
            }
            std::swap(prev, cur);
            std::swap(cur, next);
        }
        for (std::size_t i = 0; i < n; ++i) psi[i] = phase_ * acc[i];
    }

private:
    void scaled_apply(const std::vector<cplx>& in, std::vector<cplx>& out) const {
        h_.apply(in, out);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = (out[i] - mid_ * in[i]) / half_width_;
    }

    const FiniteHamiltonian& h_;
    double half_width_ = 1.0;
    double mid_ = 0.0;
    cplx phase_{1.0, 0.0};
    std::vector<cplx> coeffs_;
};

namespace detail {

inline TrajectorySample measure(const FiniteHamiltonian& h, std::span<const cplx> psi, double t) {
    TrajectorySample s;
    s.t = t;
    const std::size_t m = h.chain_length();
    double chain = 0.0, moment = 0.0, cluster = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double p = std::norm(psi[i]);
        chain += p;
        moment += p * (static_cast<double>(i) - static_cast<double>(m));
    }
    for (std::size_t i = m; i < psi.size(); ++i) cluster += std::norm(psi[i]);
    s.norm = chain + cluster;
    s.chain_fraction = chain / s.norm;
    s.cluster_fraction = cluster / s.norm;
    s.center = moment / chain;
    const auto hpsi = h.apply(psi);
    cplx e = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) e += std::conj(psi[i]) * hpsi[i];
    s.energy = e.real() / s.norm;
    return s;
}

}  // namespace detail

/// Evolves a Gaussian packet psi_n ~ exp(-(n - n_c)^2 / (4 sigma^2)) e^{i alpha0 n}
/// and samples its centre, norm and occupations every sample_interval.
inline Trajectory evolve(const SimConfig& config) {
    config.validate();
    const FiniteHamiltonian h(config.chain_length, config.cluster);
    const std::size_t m = config.chain_length;
    std::vector<cplx> psi(h.dimension());
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double n = static_cast<double>(i) - static_cast<double>(m);
        const double x = n - static_cast<double>(config.center);
        psi[i] = std::exp(-x * x / (4.0 * config.width * config.width)) * std::polar(1.0, config.alpha0 * n);
        norm += std::norm(psi[i]);
    }
    for (auto& z : psi) z /= std::sqrt(norm);

    const ChebyshevPropagator prop(h, config.sample_interval);
    const auto steps = static_cast<std::size_t>(std::llround(config.total_time / config.sample_interval));
    const auto guard = static_cast<std::size_t>(std::ceil(3.0 * config.width));

    Trajectory traj;
    traj.config = config;
    traj.samples.reserve(steps + 1);
    for (std::size_t s = 0;; ++s) {
        const auto sample = detail::measure(h, psi, config.sample_interval * static_cast<double>(s));
        if (std::fabs(sample.norm - 1.0) > config.norm_drift_budget)
            throw NormDrift("norm drifted to " + std::to_string(sample.norm) + " at t = " + std::to_string(sample.t));
        double edge = 0.0;
        for (std::size_t i = 0; i < std::min(guard, m); ++i) edge += std::norm(psi[i]);
        if (edge > 1e-6)
            throw BoundaryContamination("packet reached the far end of the chain at t = " + std::to_string(sample.t) +
                                        "; lengthen the chain or shorten the run");
        traj.samples.push_back(sample);
        if (s == steps) break;
        prop.step(psi);
    }
    return traj;
}

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
    std::size_t points = 0;
};

inline LineFit fit_line(std::span<const double> t, std::span<const double> x) {
    const std::size_t n = t.size();
    if (n < 3) throw NoLinearRegime("fit window holds fewer than 3 samples");
    double mt = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += t[i];
        mx += x[i];
    }
    mt /= static_cast<double>(n);
    mx /= static_cast<double>(n);
    double stt = 0.0, stx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - mt) * (t[i] - mt);
        stx += (t[i] - mt) * (x[i] - mx);
    }
    LineFit f;
    f.slope = stx / stt;
    f.intercept = mx - f.slope * mt;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = x[i] - (f.intercept + f.slope * t[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / static_cast<double>(n));
    f.points = n;
    return f;
}

struct DelayFit {
    double v_in = 0.0;
    double v_out = 0.0;
    double rms_in = 0.0;
    double rms_out = 0.0;
    double t_cross_out = 0.0;            // this run, outgoing line at X = n_c
    double t_cross_reference = 0.0;      // reference run, same crossing
    double tau_sim = 0.0;                // t_cross_out - t_cross_reference
    double group_velocity = 0.0;         // sin(alpha0)
    double phase_slope = 0.0;            // phi'(alpha0), relative to the reference
    double predicted_delay = 0.0;        // phase_slope / group_velocity
};

namespace detail {

inline std::pair<LineFit, LineFit> fit_legs(const Trajectory& traj) {
    constexpr double kMaxRms = 0.5;
    const auto& cfg = traj.config;
    const double lo = -static_cast<double>(cfg.chain_length) + 5.0 * cfg.width;
    const double hi = -5.0 * cfg.width;
    const auto& s = traj.samples;
    if (s.empty()) throw NoLinearRegime("empty trajectory");
    const auto turn = static_cast<std::size_t>(
        std::max_element(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.center < b.center; }) -
        s.begin());

    auto leg = [&](std::size_t from, std::size_t to, const char* which) {
        std::vector<double> t, x;
        for (std::size_t i = from; i < to; ++i)
            if (s[i].chain_fraction > 0.999 && s[i].center >= lo && s[i].center <= hi) {
                t.push_back(s[i].t);
                x.push_back(s[i].center);
            }
        if (t.size() < 3) throw NoLinearRegime(std::string("no clean ") + which + " window");
        const LineFit f = fit_line(t, x);
        if (f.rms > kMaxRms)
            throw NoLinearRegime(std::string(which) + " leg is not linear (rms " + std::to_string(f.rms) + " sites)");
        return f;
    };
    return {leg(0, turn, "incoming"), leg(turn + 1, s.size(), "outgoing")};
}

}  // namespace detail

/// Extracts the dwell delay of `traj` relative to `reference` from the
/// outgoing straight-line legs of the packet centre.
inline DelayFit fit_delay(const Trajectory& traj, const Trajectory& reference, double alpha0) {
    if (traj.config.center != reference.config.center)
        throw InvalidArgument("trajectories must start from the same packet centre");
    const auto [in, out] = detail::fit_legs(traj);
    const auto [ref_in, ref_out] = detail::fit_legs(reference);
    const double xc = static_cast<double>(traj.config.center);

    DelayFit f;
    f.v_in = in.slope;
    f.v_out = out.slope;
    f.rms_in = in.rms;
    f.rms_out = out.rms;
    f.t_cross_out = (xc - out.intercept) / out.slope;
    f.t_cross_reference = (xc - ref_out.intercept) / ref_out.slope;
    f.tau_sim = f.t_cross_out - f.t_cross_reference;
    f.group_velocity = group_velocity(alpha0);

    auto slope_of = [&](const Trajectory& t) {
        return t.config.cluster ? time_delay_numeric(*t.config.cluster, alpha0).phase_slope() : 0.0;
    };
    f.phase_slope = slope_of(traj) - slope_of(reference);
    f.predicted_delay = f.phase_slope / f.group_velocity;
    return f;
}

}  // namespace tdelay
