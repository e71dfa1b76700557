#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "units.hpp"

namespace tdelay {

/// Undirected graph on cluster sites 0..n_sites-1. As a coupling scheme every
/// site sits at on-site energy A and every edge carries hopping B.
class CouplingTopology {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    explicit CouplingTopology(std::size_t n_sites, std::vector<Edge> edges = {}) : n_sites_(n_sites) {
        if (n_sites_ == 0) throw InvalidArgument("topology needs at least one site");
        for (auto [i, j] : edges) add_edge(i, j);
    }

    /// The chain 0-1-...-(n_sites-1).
    static CouplingTopology path(std::size_t n_sites) {
        CouplingTopology t(n_sites);
        for (std::size_t i = 0; i + 1 < n_sites; ++i) t.add_edge(i, i + 1);
        return t;
    }

    static std::size_t pair_count(std::size_t n_sites) { return n_sites * (n_sites - 1) / 2; }

    /// Bit k of `mask` selects the k-th pair in (0,1), (0,2), ..., (1,2), ... order.
    static CouplingTopology from_mask(std::size_t n_sites, std::uint64_t mask) {
        CouplingTopology t(n_sites);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n_sites; ++i)
            for (std::size_t j = i + 1; j < n_sites; ++j, ++k)
                if (mask >> k & 1U) t.add_edge(i, j);
        return t;
    }

    std::uint64_t mask() const {
        std::uint64_t m = 0;
        for (auto [i, j] : edges_) m |= std::uint64_t{1} << pair_index(i, j);
        return m;
    }

    std::size_t n_sites() const { return n_sites_; }
    const std::vector<Edge>& edges() const { return edges_; }

    ClusterMatrix to_cluster() const {
        CMatrix m(n_sites_, n_sites_);
        for (std::size_t i = 0; i < n_sites_; ++i) m(i, i) = units::A / units::B;
        for (auto [i, j] : edges_) {
            m(i, j) = 1.0;
            m(j, i) = 1.0;
        }
        return ClusterMatrix(std::move(m));
    }

    /// "0-1;1-2", or "none" without edges.
    std::string describe() const {
        if (edges_.empty()) return "none";
        std::string s;
        for (auto [i, j] : edges_) {
            if (!s.empty()) s += ';';
            s += std::to_string(i) + "-" + std::to_string(j);
        }
        return s;
    }

private:
    std::size_t pair_index(std::size_t i, std::size_t j) const {
        // Pairs before row i: sum_{r<i} (n - 1 - r).
        return i * (2 * n_sites_ - i - 1) / 2 + (j - i - 1);
    }

    void add_edge(std::size_t i, std::size_t j) {
        if (i == j) throw InvalidArgument("topology edges cannot be self-loops");
        if (i > j) std::swap(i, j);
        if (j >= n_sites_) throw InvalidArgument("topology edge outside the cluster");
        const Edge e{i, j};
        const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) edges_.insert(it, e);
    }

    std::size_t n_sites_;
    std::vector<Edge> edges_;
};

struct RankedTopology {
    std::uint64_t mask = 0;
    double tau_star = 0.0;
};

struct EnumerationReport {
    std::size_t n_sites = 0;
    double alpha0 = 0.0;
    std::vector<RankedTopology> ranked;  // descending tau*, ties by mask
    std::vector<std::uint64_t> skipped;  // singular at alpha0
    std::size_t total = 0;              // every subset, skipped included

    CouplingTopology topology(const RankedTopology& r) const { return CouplingTopology::from_mask(n_sites, r.mask); }
    const RankedTopology& best() const {
        if (ranked.empty()) throw NumericalError("no topology could be evaluated");
        return ranked.front();
    }
};

/// tau* of a fixed-strength topology, or nullopt when singular at alpha0.
inline std::optional<double> topology_delay(const CouplingTopology& t, double alpha0) {
    try {
        return time_delay_analytic(t.to_cluster(), alpha0).tau_star;
    } catch (const SingularResolvent&) {
        return std::nullopt;
    } catch (const DegeneratePhase&) {
        return std::nullopt;
    }
}

/// Evaluates every edge subset of an (N+1)-site cluster, 1 <= N <= 6.
inline EnumerationReport enumerate_fixed_topologies(std::size_t n, double alpha0) {
    if (n < 1 || n > 6) throw InvalidArgument("topology enumeration supports 1 <= N <= 6");
    if (alpha0 == 0.0) throw ZeroWavenumber();
    const std::size_t sites = n + 1;
    const std::size_t count = std::size_t{1} << CouplingTopology::pair_count(sites);

    std::vector<double> taus(count);
    parallel_for(count, [&](std::size_t m) {
        const auto v = topology_delay(CouplingTopology::from_mask(sites, m), alpha0);
        taus[m] = v ? *v : std::numeric_limits<double>::quiet_NaN();
    });

    EnumerationReport report;
    report.n_sites = sites;
    report.alpha0 = alpha0;
    report.total = count;
    report.ranked.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        if (std::isnan(taus[m]))
            report.skipped.push_back(m);
        else
            report.ranked.push_back({m, taus[m]});
    }
    std::stable_sort(report.ranked.begin(), report.ranked.end(),
                     [](const RankedTopology& a, const RankedTopology& b) { return a.tau_star > b.tau_star; });
    return report;
}

}  // namespace tdelay
