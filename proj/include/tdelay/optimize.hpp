#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "error.hpp"
#include "lattice.hpp"

namespace tdelay {

struct OptimizerConfig {
    std::size_t max_iterations = 2000;
    double initial_simplex_scale = 0.01;
    double convergence_tolerance = 1e-9;  // spread of tau* across the simplex
    std::vector<std::pair<double, double>> bounds;  // empty: unbounded

    void validate(std::size_t dim) const {
        if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
        if (!(convergence_tolerance > 0.0)) throw InvalidArgument("convergence tolerance must be positive");
        if (!(initial_simplex_scale > 0.0)) throw InvalidArgument("initial simplex scale must be positive");
        if (!bounds.empty() && bounds.size() != dim)
            throw InvalidArgument("bounds must list one (lo, hi) pair per parameter");
        for (const auto& [lo, hi] : bounds)
            if (!(lo < hi)) throw InvalidArgument("each bound needs lo < hi");
    }
};

struct OptimizationResult {
    std::vector<double> best_parameters;
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;  // best value after each iteration
    std::vector<std::vector<double>> trace_parameters;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Nelder-Mead maximization of `objective`. Points outside `bounds` and
/// evaluations that throw NumericalError score -inf.
template <typename Objective>
OptimizationResult nelder_mead_maximize(Objective&& objective, std::vector<double> seed, const OptimizerConfig& config) {
    const std::size_t dim = seed.size();
    if (dim == 0) throw InvalidArgument("optimizer needs at least one parameter");
    config.validate(dim);
    auto in_bounds = [&](const std::vector<double>& x) {
        for (std::size_t k = 0; k < config.bounds.size(); ++k)
            if (x[k] < config.bounds[k].first || x[k] > config.bounds[k].second) return false;
        return true;
    };
    if (!in_bounds(seed)) throw InvalidArgument("optimizer seed lies outside its bounds");

    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    auto score = [&](const std::vector<double>& x) {
        if (!in_bounds(x)) return kNegInf;
        try {
            const double v = objective(x);
            return std::isnan(v) ? kNegInf : v;
        } catch (const NumericalError&) {
            return kNegInf;
        }
    };

    std::vector<std::vector<double>> simplex(dim + 1, seed);
    for (std::size_t k = 0; k < dim; ++k) simplex[k + 1][k] += config.initial_simplex_scale;
    std::vector<double> values(dim + 1);
    for (std::size_t k = 0; k <= dim; ++k) values[k] = score(simplex[k]);

    std::vector<std::size_t> order(dim + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
        std::vector<std::vector<double>> s;
        std::vector<double> v;
        for (std::size_t k : order) {
            s.push_back(simplex[k]);
            v.push_back(values[k]);
        }
        simplex = std::move(s);
        values = std::move(v);
    };
    auto along = [&](const std::vector<double>& from, const std::vector<double>& to, double t) {
        std::vector<double> x(dim);
        for (std::size_t k = 0; k < dim; ++k) x[k] = from[k] + t * (to[k] - from[k]);
        return x;
    };

    OptimizationResult result;
    sort_simplex();
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        result.iterations = it + 1;
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k)
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[k][d] / static_cast<double>(dim);

        const auto& worst = simplex[dim];
        const auto reflected = along(centroid, worst, -1.0);
        const double fr = score(reflected);
        if (fr > values[0]) {
            const auto expanded = along(centroid, worst, -2.0);
            const double fe = score(expanded);
            if (fe > fr) {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if (fr > values[dim - 1]) {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            const bool outside = fr > values[dim];
            const auto contracted = outside ? along(centroid, reflected, 0.5) : along(centroid, worst, 0.5);
            const double fc = score(contracted);
            if (fc > std::max(fr, values[dim])) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for (std::size_t k = 1; k <= dim; ++k) {
                    simplex[k] = along(simplex[0], simplex[k], 0.5);
                    values[k] = score(simplex[k]);
                }
            }
        }
        sort_simplex();
        result.trace.push_back(values[0]);
        result.trace_parameters.push_back(simplex[0]);
        if (std::isfinite(values[dim]) && values[0] - values[dim] <= config.convergence_tolerance) {
            result.converged = true;
            break;
        }
    }
    result.best_parameters = simplex[0];
    result.best_value = values[0];
    return result;
}

/// Maximizes tau* over real cluster couplings given as an upper triangle
/// (g00, g01, ..., gNN) / B; the seed length fixes the cluster size.
inline OptimizationResult optimize_couplings(double alpha0, std::vector<double> seed, const OptimizerConfig& config) {
    if (alpha0 == 0.0) throw ZeroWavenumber();
    ClusterMatrix::sites_for_upper_triangle(seed.size());
    auto tau = [&](const std::vector<double>& x) {
        return time_delay_analytic(ClusterMatrix::from_upper_triangle(x), alpha0).tau_star;
    };
    return nelder_mead_maximize(tau, std::move(seed), config);
}

}  // namespace tdelay
