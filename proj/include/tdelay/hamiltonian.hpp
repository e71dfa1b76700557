#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "dense.hpp"
#include "error.hpp"
#include "units.hpp"

namespace tdelay {

/// Single-particle Hamiltonian of a chain truncated to sites -M..-1, with an
/// optional cluster bonded to site -1 through cluster site 0.
///
/// State index layout: chain site n maps to n + M, cluster site j to M + j.
/// Without a cluster the chain simply ends after site -1 (Dirichlet wall).
class FiniteHamiltonian {
public:
    FiniteHamiltonian(std::size_t chain_length, std::optional<ClusterMatrix> cluster)
        : chain_length_(chain_length), cluster_(std::move(cluster)) {
        if (chain_length_ < 1) throw InvalidArgument("chain needs at least one site");
    }

    std::size_t chain_length() const { return chain_length_; }
    std::size_t cluster_size() const { return cluster_ ? cluster_->size() : 0; }
    std::size_t dimension() const { return chain_length_ + cluster_size(); }
    const std::optional<ClusterMatrix>& cluster() const { return cluster_; }

    std::size_t chain_index(long site) const { return static_cast<std::size_t>(site + static_cast<long>(chain_length_)); }
    std::size_t cluster_index(std::size_t j) const { return chain_length_ + j; }

    /// out = H in.
    void apply(std::span<const cplx> in, std::span<cplx> out) const {
        const std::size_t m = chain_length_;
        constexpr double a = units::A;
        constexpr double b = units::B;
        for (std::size_t i = 0; i < m; ++i) {
            cplx acc = a * in[i];
            if (i > 0) acc += b * in[i - 1];
            if (i + 1 < m) acc += b * in[i + 1];
            out[i] = acc;
        }
        if (!cluster_) return;
        const std::size_t nc = cluster_->size();
        out[m - 1] += b * in[m];
        for (std::size_t i = 0; i < nc; ++i) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < nc; ++j) acc += cluster_->coupling(i, j) * in[m + j];
            out[m + i] = acc;
        }
        out[m] += b * in[m - 1];
    }

    std::vector<cplx> apply(std::span<const cplx> in) const {
        std::vector<cplx> out(dimension());
        apply(in, out);
        return out;
    }

    CMatrix dense() const {
        const std::size_t n = dimension();
        CMatrix h(n, n);
        std::vector<cplx> e(n);
        for (std::size_t j = 0; j < n; ++j) {
            std::fill(e.begin(), e.end(), cplx{});
            e[j] = 1.0;
            const auto col = apply(e);
            for (std::size_t i = 0; i < n; ++i) h(i, j) = col[i];
        }
        return h;
    }

    /// Gershgorin enclosure of the spectrum.
    std::pair<double, double> spectral_bounds() const {
        const std::size_t n = dimension();
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
            double centre = 0.0, radius = 0.0;
            if (i < chain_length_) {
                centre = units::A;
                radius = (i > 0 ? -units::B : 0.0) + (i + 1 < chain_length_ ? -units::B : 0.0);
                if (cluster_ && i + 1 == chain_length_) radius += -units::B;
            } else {
                const std::size_t r = i - chain_length_;
                centre = cluster_->coupling(r, r).real();
                for (std::size_t j = 0; j < cluster_->size(); ++j)
                    if (j != r) radius += std::abs(cluster_->coupling(r, j));
                if (r == 0) radius += -units::B;
            }
            if (first || centre - radius < lo) lo = centre - radius;
            if (first || centre + radius > hi) hi = centre + radius;
            first = false;
        }
        return {lo, hi};
    }

private:
    std::size_t chain_length_;
    std::optional<ClusterMatrix> cluster_;
};

inline FiniteHamiltonian build_hamiltonian(std::size_t chain_length, std::optional<ClusterMatrix> cluster) {
    return FiniteHamiltonian(chain_length, std::move(cluster));
}

}  // namespace tdelay
