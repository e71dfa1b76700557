#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "well.hpp"

namespace tdelay {

/// A swept parameter. Names are "gIJ" for the lattice coupling g_IJ/B
/// (real; the mirrored entry is set to match) or "VK" for the depth V/|B| of
/// well segment K.
struct SweepAxis {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 2;

    double value(std::size_t i) const {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

enum class SweepModel { lattice, well };

struct SweepGrid {
    std::vector<SweepAxis> axes;
    std::map<std::string, double> fixed;
    double alpha0 = 0.01;
    SweepModel model = SweepModel::lattice;
    std::size_t n_sites = 1;                  // lattice model
    std::vector<double> segment_lengths{1.0};  // well model
};

enum class EvalStatus { ok, singular, degenerate, step_too_large, failed };

inline const char* to_string(EvalStatus s) {
    switch (s) {
        case EvalStatus::ok: return "ok";
        case EvalStatus::singular: return "singular";
        case EvalStatus::degenerate: return "degenerate";
        case EvalStatus::step_too_large: return "step_too_large";
        case EvalStatus::failed: return "failed";
    }
    return "failed";
}

struct SweepRow {
    std::vector<double> values;
    double tau_star = std::numeric_limits<double>::quiet_NaN();
    double tau_star_scaled = std::numeric_limits<double>::quiet_NaN();
    EvalStatus status = EvalStatus::ok;
};

struct SweepTable {
    std::vector<std::string> parameters;
    std::vector<SweepRow> rows;
};

namespace detail {

struct ParamRef {
    bool coupling = true;
    std::size_t i = 0;
    std::size_t j = 0;
};

inline ParamRef parse_param(const std::string& name, const SweepGrid& grid) {
    auto digits = [&](std::size_t from) {
        if (from >= name.size()) return false;
        for (std::size_t k = from; k < name.size(); ++k)
            if (!std::isdigit(static_cast<unsigned char>(name[k]))) return false;
        return true;
    };
    if (grid.model == SweepModel::lattice) {
        if (name.size() == 3 && name[0] == 'g' && digits(1)) {
            const std::size_t i = static_cast<std::size_t>(name[1] - '0');
            const std::size_t j = static_cast<std::size_t>(name[2] - '0');
            if (i >= grid.n_sites || j >= grid.n_sites)
                throw InvalidArgument("parameter " + name + " outside a " + std::to_string(grid.n_sites) +
                                      "-site cluster");
            return {true, i, j};
        }
    } else if (name.size() >= 2 && name[0] == 'V' && digits(1)) {
        const std::size_t k = std::stoul(name.substr(1));
        if (k >= grid.segment_lengths.size()) throw InvalidArgument("parameter " + name + " names no well segment");
        return {false, k, 0};
    }
    throw InvalidArgument("unknown sweep parameter '" + name + "'");
}

}  // namespace detail

/// Evaluates tau* at every grid point, first axis slowest.
inline SweepTable sweep(const SweepGrid& grid) {
    if (grid.model == SweepModel::well && grid.segment_lengths.empty())
        throw InvalidArgument("well sweep needs at least one segment");
    for (const auto& ax : grid.axes)
        if (ax.count == 0) throw EmptyGrid("sweep axis '" + ax.name + "' has no points");
    if (grid.axes.empty() || grid.axes.size() > 2) throw InvalidArgument("sweep needs one or two axes");
    for (const auto& ax : grid.axes) {
        if (ax.count < 2) throw InvalidArgument("sweep axis '" + ax.name + "' needs at least 2 points");
        if (!(ax.lo < ax.hi)) throw InvalidArgument("sweep axis '" + ax.name + "' needs lo < hi");
    }
    if (grid.alpha0 == 0.0) throw ZeroWavenumber();

    std::vector<detail::ParamRef> axis_refs;
    for (const auto& ax : grid.axes) axis_refs.push_back(detail::parse_param(ax.name, grid));
    std::vector<std::pair<detail::ParamRef, double>> fixed_refs;
    for (const auto& [name, v] : grid.fixed) fixed_refs.emplace_back(detail::parse_param(name, grid), v);

    const std::size_t n0 = grid.axes[0].count;
    const std::size_t n1 = grid.axes.size() > 1 ? grid.axes[1].count : 1;

    SweepTable table;
    for (const auto& ax : grid.axes) table.parameters.push_back(ax.name);
    table.rows.resize(n0 * n1);

    parallel_for(n0 * n1, [&](std::size_t idx) {
        SweepRow& row = table.rows[idx];
        const std::size_t i0 = idx / n1;
        const std::size_t i1 = idx % n1;
        row.values.push_back(grid.axes[0].value(i0));
        if (grid.axes.size() > 1) row.values.push_back(grid.axes[1].value(i1));

        try {
            TimeDelay d;
            if (grid.model == SweepModel::lattice) {
                CMatrix m(grid.n_sites, grid.n_sites);
                auto set = [&](const detail::ParamRef& p, double v) {
                    m(p.i, p.j) = v;
                    m(p.j, p.i) = v;
                };
                for (const auto& [p, v] : fixed_refs) set(p, v);
                for (std::size_t a = 0; a < axis_refs.size(); ++a) set(axis_refs[a], row.values[a]);
                d = time_delay_analytic(ClusterMatrix(std::move(m)), grid.alpha0);
            } else {
                std::vector<WellSegment> segs;
                for (double l : grid.segment_lengths) segs.push_back({0.0, l});
                for (const auto& [p, v] : fixed_refs) segs[p.i].depth = v;
                for (std::size_t a = 0; a < axis_refs.size(); ++a) segs[axis_refs[a].i].depth = row.values[a];
                d = well_time_delay(WellSpec(std::move(segs)), grid.alpha0);
            }
            row.tau_star = d.tau_star;
            row.tau_star_scaled = d.tau_star_scaled;
        } catch (const SingularResolvent&) {
            row.status = EvalStatus::singular;
        } catch (const DegeneratePhase&) {
            row.status = EvalStatus::degenerate;
        } catch (const DegenerateMatch&) {
            row.status = EvalStatus::degenerate;
        } catch (const StepTooLarge&) {
            row.status = EvalStatus::step_too_large;
        } catch (const NumericalError&) {
            row.status = EvalStatus::failed;
        }
    });
    return table;
}

}  // namespace tdelay
