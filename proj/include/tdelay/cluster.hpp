#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>

#include "dense.hpp"
#include "error.hpp"
#include "units.hpp"

namespace tdelay {

/// Hermitian coupling block of the finite cluster (sites 0..N), held as the
/// dimensionless ratios g_ij / B. Site 0 is the one bonded to the chain.
class ClusterMatrix {
public:
    static constexpr double kHermitianTolerance = 1e-12;

    explicit ClusterMatrix(CMatrix ratios) : ratios_(std::move(ratios)) {
        if (!ratios_.square()) throw InvalidArgument("cluster matrix must be square");
        if (ratios_.rows() == 0) throw InvalidArgument("cluster needs at least one site");
        for (std::size_t i = 0; i < ratios_.rows(); ++i)
            for (std::size_t j = 0; j < ratios_.cols(); ++j) {
                const cplx z = ratios_(i, j);
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                    throw InvalidArgument("cluster entry (" + std::to_string(i) + "," + std::to_string(j) +
                                          ") is not finite");
            }
        const auto [defect, where] = ratios_.hermitian_defect();
        if (defect > kHermitianTolerance) throw NonHermitian(where.first, where.second, defect);
    }

    static ClusterMatrix one_site(double g00_over_B) { return ClusterMatrix(CMatrix{{g00_over_B}}); }

    static ClusterMatrix two_site(double g00_over_B, cplx g01_over_B, double g11_over_B) {
        return ClusterMatrix(CMatrix{{g00_over_B, g01_over_B}, {std::conj(g01_over_B), g11_over_B}});
    }

    /// Real symmetric cluster from its upper triangle listed row by row:
    /// (g00, g01, ..., g0N, g11, ..., gNN). Length must be a triangular number.
    static ClusterMatrix from_upper_triangle(std::span<const double> upper) {
        const std::size_t n = sites_for_upper_triangle(upper.size());
        CMatrix m(n, n);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                m(i, j) = upper[k];
                m(j, i) = upper[k];
                ++k;
            }
        return ClusterMatrix(std::move(m));
    }

    static std::size_t sites_for_upper_triangle(std::size_t len) {
        std::size_t n = 0;
        while (n * (n + 1) / 2 < len) ++n;
        if (n == 0 || n * (n + 1) / 2 != len)
            throw InvalidArgument("upper-triangle parameter count " + std::to_string(len) +
                                  " is not a triangular number");
        return n;
    }

    std::size_t size() const { return ratios_.rows(); }
    cplx ratio(std::size_t i, std::size_t j) const { return ratios_(i, j); }
    const CMatrix& ratios() const { return ratios_; }

    /// g_ij in energy units.
    cplx coupling(std::size_t i, std::size_t j) const { return units::B * ratios_(i, j); }

private:
    CMatrix ratios_;
};

}  // namespace tdelay
