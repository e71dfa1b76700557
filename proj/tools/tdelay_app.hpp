#pragma once

// Command-line front end. Every subcommand resolves a JSON configuration
// (file first, then flags), validates it, runs, and writes one CSV table plus
// a sidecar <output>.json holding the resolved configuration.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdelay/tdelay.hpp"

namespace tdelay::app {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

class WriteError : public Error {
public:
    using Error::Error;
};

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
    public:
        Row& operator<<(double x) { return add(format_double(x)); }
        Row& operator<<(const std::string& s) { return add(s); }
        Row& operator<<(const char* s) { return add(s); }
        Row& operator<<(std::size_t n) { return add(std::to_string(n)); }
        Row& operator<<(long n) { return add(std::to_string(n)); }
        Row& operator<<(int n) { return add(std::to_string(n)); }

    private:
        friend class CsvTable;
        Row& add(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        std::vector<std::string> cells_;
    };

    Row& row() { return rows_.emplace_back(); }

    std::string str() const {
        std::string out;
        append_line(out, header_);
        for (const auto& r : rows_) {
            if (r.cells_.size() != header_.size()) throw Error("internal: CSV row width mismatch");
            append_line(out, r.cells_);
        }
        return out;
    }

private:
    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

// ---- config access ----

inline const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
    return obj.at(key);
}

inline double as_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + " must be a number");
    return v.get<double>();
}

inline std::size_t as_count(const json& v, const std::string& what) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(what + " must be a non-negative integer");
    return v.get<std::size_t>();
}

inline double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return as_number(obj.at(key), where + "." + key);
}

inline std::size_t count_or(const json& obj, const std::string& key, std::size_t fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return as_count(obj.at(key), where + "." + key);
}

inline const json& block(const json& cfg, const std::string& key) {
    static const json empty = json::object();
    if (!cfg.contains(key)) return empty;
    const json& b = cfg.at(key);
    if (!b.is_object()) throw ConfigError("'" + key + "' must be an object");
    return b;
}

inline cplx parse_complex(const json& v, const std::string& what) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(what + " must be a number or an [re, im] pair");
}

/// Cluster couplings g/B as a square array of rows; complex entries are [re, im].
inline ClusterMatrix parse_cluster(const json& v) {
    if (!v.is_array() || v.empty()) throw ConfigError("cluster must be a non-empty array of rows");
    const std::size_t n = v.size();
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!v[i].is_array() || v[i].size() != n)
            throw ConfigError("cluster row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = parse_complex(v[i][j], "cluster entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    return ClusterMatrix(std::move(m));
}

inline std::vector<WellSegment> parse_segments(const json& v) {
    if (!v.is_array() || v.empty()) throw ConfigError("well.segments must be a non-empty array");
    std::vector<WellSegment> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string where = "well.segments[" + std::to_string(k) + "]";
        const json& s = v[k];
        if (s.is_array() && s.size() == 2) {
            out.push_back({as_number(s[0], where + "[0]"), as_number(s[1], where + "[1]")});
        } else if (s.is_object()) {
            out.push_back({as_number(require(s, "depth", where), where + ".depth"), number_or(s, "length", 1.0, where)});
        } else {
            throw ConfigError(where + " must be {\"depth\", \"length\"} or [depth, length]");
        }
    }
    return out;
}

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError(what + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw ConfigError(what + " is empty");
    return out;
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// "V:L,V:L" -> [[V, L], [V, L]]
inline json segments_from_flag(const std::string& text) {
    json segs = json::array();
    for (const auto& part : split(text, ',')) {
        auto fields = split(part, ':');
        if (fields.size() != 2) throw ConfigError("--segments expects depth:length pairs separated by commas");
        const auto nums = parse_number_list(fields[0] + "," + fields[1], "--segments");
        segs.push_back(json::array({nums[0], nums[1]}));
    }
    return segs;
}

// "name:lo:hi:count"
inline json axis_from_flag(const std::string& text) {
    auto f = split(text, ':');
    if (f.size() != 4) throw ConfigError("--axis expects name:lo:hi:count");
    const auto range = parse_number_list(f[1] + "," + f[2], "--axis");
    const auto count = parse_number_list(f[3], "--axis count");
    if (count[0] < 0 || count[0] != std::floor(count[0])) throw ConfigError("--axis count must be a whole number");
    return json{{"name", f[0]}, {"lo", range[0]}, {"hi", range[1]}, {"count", static_cast<long long>(count[0])}};
}

inline std::string param_column(const std::string& name) {
    if (!name.empty() && name[0] == 'g') return name + "_over_B";
    return name + "_over_absB";
}

// ---- commands ----

inline double resolved_alpha0(const json& cfg) { return as_number(require(cfg, "alpha0", "config"), "alpha0"); }

inline CsvTable cmd_delay(const json& cfg) {
    const ClusterMatrix g = parse_cluster(require(cfg, "cluster", "delay"));
    const json& b = block(cfg, "delay");
    std::vector<double> alphas{resolved_alpha0(cfg)};
    if (b.contains("alphas")) {
        alphas.clear();
        for (const auto& a : b.at("alphas")) alphas.push_back(as_number(a, "delay.alphas"));
        if (alphas.empty()) throw ConfigError("delay.alphas is empty");
    }
    const bool has_h = b.contains("h");
    const double h = has_h ? as_number(b.at("h"), "delay.h") : 0.0;

    CsvTable t({"alpha0", "phase", "tau_star", "tau_star_scaled", "numeric_tau_star_scaled"});
    for (double a : alphas) {
        const PhaseSample p = reflection_coefficient(g, a);
        const TimeDelay d = time_delay_analytic(g, a);
        const TimeDelay n = has_h ? time_delay_numeric(g, a, h) : time_delay_numeric(g, a);
        t.row() << a << p.phase << d.tau_star << d.tau_star_scaled << n.tau_star_scaled;
    }
    return t;
}

inline CsvTable cmd_extrema(const json& cfg) {
    const OneSiteExtrema e = one_site_extrema(resolved_alpha0(cfg));
    CsvTable t({"alpha0", "g_max_over_B", "tau_max", "tau_max_scaled", "g_min_over_B", "tau_min", "tau_min_scaled"});
    t.row() << e.alpha0 << e.g_max_over_B << e.tau_max << 2.0 * e.alpha0 * e.tau_max << e.g_min_over_B << e.tau_min
            << 2.0 * e.alpha0 * e.tau_min;
    return t;
}

inline CsvTable cmd_sweep(const json& cfg) {
    const json& b = block(cfg, "sweep");
    SweepGrid grid;
    grid.alpha0 = resolved_alpha0(cfg);
    const std::string model = b.value("model", std::string("lattice"));
    if (model == "lattice") {
        grid.model = SweepModel::lattice;
    } else if (model == "well") {
        grid.model = SweepModel::well;
    } else {
        throw ConfigError("sweep.model must be 'lattice' or 'well'");
    }
    grid.n_sites = count_or(b, "sites", 1, "sweep");
    if (b.contains("lengths")) {
        grid.segment_lengths.clear();
        for (const auto& l : b.at("lengths")) grid.segment_lengths.push_back(as_number(l, "sweep.lengths"));
    }
    const json& axes = require(b, "axes", "sweep");
    if (!axes.is_array()) throw ConfigError("sweep.axes must be an array");
    for (const auto& a : axes) {
        if (!a.contains("name") || !a.at("name").is_string()) throw ConfigError("sweep axis needs a string 'name'");
        grid.axes.push_back({a.at("name").get<std::string>(), as_number(require(a, "lo", "sweep axis"), "lo"),
                             as_number(require(a, "hi", "sweep axis"), "hi"),
                             as_count(require(a, "count", "sweep axis"), "count")});
    }
    if (b.contains("fixed")) {
        if (!b.at("fixed").is_object()) throw ConfigError("sweep.fixed must be an object");
        for (const auto& [k, v] : b.at("fixed").items()) grid.fixed[k] = as_number(v, "sweep.fixed." + k);
    }

    const SweepTable table = sweep(grid);
    std::vector<std::string> header;
    for (const auto& p : table.parameters) header.push_back(param_column(p));
    header.insert(header.end(), {"tau_star", "tau_star_scaled", "status"});
    CsvTable t(header);
    for (const auto& r : table.rows) {
        auto& row = t.row();
        for (double v : r.values) row << v;
        row << r.tau_star << r.tau_star_scaled << to_string(r.status);
    }
    return t;
}

inline CsvTable cmd_peaks(const json& cfg) {
    const double a = resolved_alpha0(cfg);
    const json& b = block(cfg, "peaks");
    const double tol = number_or(b, "refine_tol", 1e-10, "peaks");
    const std::size_t grid_n = count_or(b, "grid", 20001, "peaks");
    const json& cases = require(b, "cases", "peaks");
    if (!cases.is_array() || cases.empty()) throw ConfigError("peaks.cases must be a non-empty array");

    CsvTable t({"g01_over_B", "g11_over_B", "g00_over_B", "tau_star", "tau_star_scaled", "resonance_g00_over_B",
                "closed_form_g00_over_B"});
    for (const auto& c : cases) {
        const double g01 = as_number(require(c, "g01", "peaks case"), "g01");
        const double g11 = as_number(require(c, "g11", "peaks case"), "g11");
        const json& br = require(c, "bracket", "peaks case");
        if (!br.is_array() || br.size() != 2) throw ConfigError("peaks case bracket must be [lo, hi]");
        const CouplingPeak p =
            find_peak_1d(g01, g11, a, {as_number(br[0], "bracket"), as_number(br[1], "bracket")}, tol, grid_n);
        t.row() << g01 << g11 << p.g00_over_B << p.delay.tau_star << p.delay.tau_star_scaled
                << two_site_resonance(g01, g11, a) << two_site_peak_location(g01, g11, a);
    }
    return t;
}

inline CsvTable cmd_optimize(const json& cfg) {
    const double a = resolved_alpha0(cfg);
    const json& b = block(cfg, "optimize");
    std::vector<double> seed;
    for (const auto& v : require(b, "seed", "optimize")) seed.push_back(as_number(v, "optimize.seed"));
    OptimizerConfig oc;
    oc.max_iterations = count_or(b, "max_iterations", oc.max_iterations, "optimize");
    oc.initial_simplex_scale = number_or(b, "simplex_scale", oc.initial_simplex_scale, "optimize");
    oc.convergence_tolerance = number_or(b, "tolerance", oc.convergence_tolerance, "optimize");
    if (b.contains("bounds")) {
        for (const auto& p : b.at("bounds")) {
            if (!p.is_array() || p.size() != 2) throw ConfigError("optimize.bounds entries must be [lo, hi]");
            oc.bounds.emplace_back(as_number(p[0], "bound"), as_number(p[1], "bound"));
        }
    }

    const std::size_t n = ClusterMatrix::sites_for_upper_triangle(seed.size());
    const OptimizationResult r = optimize_couplings(a, seed, oc);
    std::vector<std::string> header{"iteration", "tau_star", "tau_star_scaled"};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) header.push_back("g" + std::to_string(i) + std::to_string(j) + "_over_B");
    header.push_back("status");
    CsvTable t(header);
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        auto& row = t.row();
        row << k + 1 << r.trace[k] << 2.0 * a * r.trace[k];
        for (double p : r.trace_parameters[k]) row << p;
        const bool last = k + 1 == r.trace.size();
        row << (!last ? "running" : r.converged ? "converged" : "iteration_limit");
    }
    return t;
}

inline CsvTable cmd_well(const json& cfg) {
    const double a = resolved_alpha0(cfg);
    const json& b = block(cfg, "well");
    const WellSpec spec(parse_segments(require(b, "segments", "well")));

    if (!b.contains("scan")) {
        const WellPhase p = well_reflection_phase(spec, a);
        const TimeDelay d = b.contains("h") ? well_time_delay(spec, a, as_number(b.at("h"), "well.h"))
                                            : well_time_delay(spec, a);
        CsvTable t({"alpha0", "reflection_re", "reflection_im", "phase", "tau_star", "tau_star_scaled"});
        t.row() << a << p.coefficient.real() << p.coefficient.imag() << p.phase << d.tau_star << d.tau_star_scaled;
        return t;
    }

    const json& s = b.at("scan");
    const std::size_t seg = count_or(s, "segment", 0, "well.scan");
    const double lo = as_number(require(s, "lo", "well.scan"), "well.scan.lo");
    const double hi = as_number(require(s, "hi", "well.scan"), "well.scan.hi");
    const std::size_t grid_n = count_or(s, "grid", 100001, "well.scan");
    const ExtremaScan scan = locate_delay_extrema(spec, seg, a, lo, hi, grid_n);
    if (seg >= spec.segments().size()) throw ConfigError("well.scan.segment out of range");
    const double len = spec.segments()[seg].length;

    // Each extremum is matched to the nearest standing-wave order m, where
    // sqrt(alpha^2 - V) L = (m + 1/2) pi for maxima and m pi for minima.
    CsvTable t({"depth_over_absB", "tau_star", "tau_star_scaled", "kind", "order", "standing_wave_depth_over_absB",
                "interference_depth_over_absB"});
    for (const auto& e : scan.extrema) {
        const bool is_max = e.kind == ExtremumKind::max;
        const double q = std::sqrt(std::fmax(a * a - e.depth, 0.0)) * len / std::numbers::pi;
        const int m = std::max(0, static_cast<int>(std::lround(is_max ? q - 0.5 : q)));
        const double offset = is_max ? m + 0.5 : m;
        const double standing = a * a - offset * offset * std::numbers::pi * std::numbers::pi / (len * len);
        const InterferenceDepths ref = interference_depths(a, len, {m});
        t.row() << e.depth << e.tau_star << 2.0 * a * e.tau_star << to_string(e.kind) << m << standing
                << (is_max ? ref.constructive[0] : ref.destructive[0]);
    }
    return t;
}

inline CsvTable cmd_enumerate(const json& cfg) {
    const double a = resolved_alpha0(cfg);
    const json& b = block(cfg, "enumerate");
    const std::size_t n = as_count(require(b, "n", "enumerate"), "enumerate.n");
    const EnumerationReport rep = enumerate_fixed_topologies(n, a);
    CsvTable t({"rank", "mask", "edges", "tau_star", "tau_star_scaled", "status"});
    std::size_t rank = 0;
    for (const auto& r : rep.ranked)
        t.row() << ++rank << static_cast<std::size_t>(r.mask) << rep.topology(r).describe() << r.tau_star
                << 2.0 * a * r.tau_star << "ok";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto m : rep.skipped)
        t.row() << ++rank << static_cast<std::size_t>(m) << CouplingTopology::from_mask(n + 1, m).describe() << nan
                << nan << "singular";
    return t;
}

struct SimulateOutput {
    CsvTable trajectory;
    std::optional<CsvTable> fit;
};

inline SimulateOutput cmd_simulate(const json& cfg) {
    const json& b = block(cfg, "simulate");
    SimConfig sc;
    sc.alpha0 = resolved_alpha0(cfg);
    if (cfg.contains("cluster")) sc.cluster = parse_cluster(cfg.at("cluster"));
    sc.chain_length = count_or(b, "chain_length", sc.chain_length, "simulate");
    if (b.contains("center")) {
        const json& c = b.at("center");
        if (!c.is_number_integer()) throw ConfigError("simulate.center must be an integer site index");
        sc.center = c.get<long>();
    }
    sc.width = number_or(b, "width", sc.width, "simulate");
    sc.total_time = number_or(b, "total_time", sc.total_time, "simulate");
    sc.sample_interval = number_or(b, "sample_interval", sc.sample_interval, "simulate");
    sc.norm_drift_budget = number_or(b, "norm_drift_budget", sc.norm_drift_budget, "simulate");
    sc.validate();

    SimConfig ref = sc;
    ref.cluster.reset();

    SimulateOutput out{CsvTable({"run", "t", "center", "norm", "chain_fraction", "cluster_fraction", "energy"}),
                       std::nullopt};
    const Trajectory run = evolve(sc);
    auto emit = [&](const char* label, const Trajectory& tr) {
        for (const auto& s : tr.samples)
            out.trajectory.row() << label << s.t << s.center << s.norm << s.chain_fraction << s.cluster_fraction
                                 << s.energy;
    };
    emit(sc.cluster ? "cluster" : "bare", run);
    if (!sc.cluster) return out;

    const Trajectory reference = evolve(ref);
    emit("reference", reference);
    const DelayFit f = fit_delay(run, reference, sc.alpha0);
    // The small-wavenumber approximation uses v = alpha0 in place of sin(alpha0).
    CsvTable fit({"tau_sim", "predicted_delay", "relative_error", "phase_slope", "group_velocity",
                  "small_alpha_velocity", "small_alpha_predicted_delay", "v_in", "v_out", "rms_in", "rms_out"});
    fit.row() << f.tau_sim << f.predicted_delay << (f.tau_sim - f.predicted_delay) / f.predicted_delay
              << f.phase_slope << f.group_velocity << sc.alpha0 << f.phase_slope / sc.alpha0 << f.v_in << f.v_out
              << f.rms_in << f.rms_out;
    out.fit = std::move(fit);
    return out;
}

// ---- output ----

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw WriteError("cannot open '" + path + "' for writing");
    f << content;
    f.close();
    if (!f) throw WriteError("failed writing '" + path + "'");
}

inline std::string sidecar(const std::string& command, const json& cfg) {
    json doc{{"tool", "tdelay"}, {"version", kVersion}, {"command", command}, {"config", cfg}};
    return doc.dump(2) + "\n";
}

// ---- driver ----

struct Flags {
    std::string config_path;
    std::string output;
    std::optional<double> alpha0;
    std::optional<std::string> cluster;
    // delay
    std::optional<double> h;
    // sweep
    std::vector<std::string> axes;
    std::vector<std::string> fixed;
    std::optional<std::size_t> sites;
    std::optional<std::string> model;
    std::optional<std::string> lengths;
    // peaks
    std::optional<double> g01, g11, lo, hi, tol;
    std::optional<std::size_t> grid;
    // optimize
    std::optional<std::string> seed;
    std::optional<std::size_t> max_iter;
    std::optional<double> scale;
    // well
    std::optional<std::string> segments;
    std::optional<std::size_t> scan_segment;
    // enumerate
    std::optional<std::size_t> n;
    // simulate
    std::optional<std::size_t> chain_length;
    std::optional<long> center;
    std::optional<double> width, total_time, sample_interval;
};

inline json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    // A sidecar written by this tool nests the resolved configuration.
    if (doc.contains("tool") && doc.contains("config")) return doc.at("config");
    return doc;
}

inline json merge_flags(const std::string& command, json cfg, const Flags& f) {
    auto sub = [&](const char* key) -> json& {
        if (!cfg.contains(key)) cfg[key] = json::object();
        if (!cfg[key].is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
        return cfg[key];
    };
    if (f.alpha0) cfg["alpha0"] = *f.alpha0;
    if (!cfg.contains("alpha0")) cfg["alpha0"] = command == "simulate" ? 0.5 : 0.01;
    if (f.cluster) {
        try {
            cfg["cluster"] = json::parse(*f.cluster);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("--cluster is not valid JSON: ") + e.what());
        }
    }

    if (command == "delay" && f.h) sub("delay")["h"] = *f.h;
    if (command == "sweep") {
        json& s = sub("sweep");
        if (!f.axes.empty()) {
            s["axes"] = json::array();
            for (const auto& a : f.axes) s["axes"].push_back(axis_from_flag(a));
        }
        for (const auto& kv : f.fixed) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--fixed expects name=value");
            s["fixed"][kv.substr(0, eq)] = parse_number_list(kv.substr(eq + 1), "--fixed")[0];
        }
        if (f.sites) s["sites"] = *f.sites;
        if (f.model) s["model"] = *f.model;
        if (f.lengths) s["lengths"] = parse_number_list(*f.lengths, "--lengths");
    }
    if (command == "peaks") {
        json& p = sub("peaks");
        const bool any = f.g01 || f.g11 || f.lo || f.hi;
        if (any) {
            if (!(f.g01 && f.g11 && f.lo && f.hi)) throw ConfigError("--g01, --g11, --lo and --hi must be given together");
            p["cases"] = json::array({json{{"g01", *f.g01}, {"g11", *f.g11}, {"bracket", {*f.lo, *f.hi}}}});
        }
        if (f.tol) p["refine_tol"] = *f.tol;
        if (f.grid) p["grid"] = *f.grid;
    }
    if (command == "optimize") {
        json& o = sub("optimize");
        if (f.seed) o["seed"] = parse_number_list(*f.seed, "--seed");
        if (f.max_iter) o["max_iterations"] = *f.max_iter;
        if (f.scale) o["simplex_scale"] = *f.scale;
        if (f.tol) o["tolerance"] = *f.tol;
    }
    if (command == "well") {
        json& w = sub("well");
        if (f.segments) w["segments"] = segments_from_flag(*f.segments);
        if (f.h) w["h"] = *f.h;
        if (f.scan_segment || f.lo || f.hi || f.grid) {
            if (!w.contains("scan")) w["scan"] = json::object();
            json& s = w["scan"];
            if (f.scan_segment) s["segment"] = *f.scan_segment;
            if (f.lo) s["lo"] = *f.lo;
            if (f.hi) s["hi"] = *f.hi;
            if (f.grid) s["grid"] = *f.grid;
        }
    }
    if (command == "enumerate" && f.n) sub("enumerate")["n"] = *f.n;
    if (command == "simulate") {
        json& s = sub("simulate");
        if (f.chain_length) s["chain_length"] = *f.chain_length;
        if (f.center) s["center"] = *f.center;
        if (f.width) s["width"] = *f.width;
        if (f.total_time) s["total_time"] = *f.total_time;
        if (f.sample_interval) s["sample_interval"] = *f.sample_interval;
    }
    return cfg;
}

// Writes every defaulted field into `cfg`, so the sidecar records the full
// resolved configuration.
inline void fill_defaults(const std::string& command, json& cfg) {
    auto sub = [&](json& parent, const char* key) -> json& {
        if (!parent.contains(key)) parent[key] = json::object();
        if (!parent[key].is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
        return parent[key];
    };
    auto def = [](json& b, const char* key, json value) {
        if (!b.contains(key)) b[key] = std::move(value);
    };
    if (command == "sweep") {
        json& s = sub(cfg, "sweep");
        def(s, "model", "lattice");
        if (s["model"] == "well") def(s, "lengths", json::array({1.0}));
        else def(s, "sites", 1);
        def(s, "fixed", json::object());
    } else if (command == "peaks") {
        json& p = sub(cfg, "peaks");
        def(p, "refine_tol", 1e-10);
        def(p, "grid", 20001);
    } else if (command == "optimize") {
        const OptimizerConfig oc;
        json& o = sub(cfg, "optimize");
        def(o, "max_iterations", oc.max_iterations);
        def(o, "simplex_scale", oc.initial_simplex_scale);
        def(o, "tolerance", oc.convergence_tolerance);
    } else if (command == "well") {
        json& w = sub(cfg, "well");
        if (w.contains("scan")) {
            json& sc = sub(w, "scan");
            def(sc, "segment", 0);
            def(sc, "grid", 100001);
        }
    } else if (command == "simulate") {
        const SimConfig sc;
        json& s = sub(cfg, "simulate");
        def(s, "chain_length", sc.chain_length);
        def(s, "center", sc.center);
        def(s, "width", sc.width);
        def(s, "total_time", sc.total_time);
        def(s, "sample_interval", sc.sample_interval);
        def(s, "norm_drift_budget", sc.norm_drift_budget);
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum scattering time delays on lattices and continuum wells", "tdelay"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* c, bool with_cluster) {
        c->add_option("--config", f.config_path, "JSON configuration file (or a sidecar from a previous run)");
        c->add_option("-o,--output", f.output, "CSV output path; stdout when absent");
        c->add_option("--alpha0", f.alpha0, "incident wavenumber alpha0 (units of 1/d)");
        if (with_cluster) c->add_option("--cluster", f.cluster, "cluster couplings g/B as JSON rows");
    };

    auto* delay = app.add_subcommand("delay", "tau* of a cluster, analytic and from the phase slope");
    common(delay, true);
    delay->add_option("--step", f.h, "central-difference step in alpha");

    auto* sweep_cmd = app.add_subcommand("sweep", "tau* over a grid of couplings or well depths");
    common(sweep_cmd, false);
    sweep_cmd->add_option("--axis", f.axes, "name:lo:hi:count (repeatable; first is slowest)");
    sweep_cmd->add_option("--fixed", f.fixed, "name=value (repeatable)");
    sweep_cmd->add_option("--sites", f.sites, "cluster size for the lattice model");
    sweep_cmd->add_option("--model", f.model, "lattice or well");
    sweep_cmd->add_option("--lengths", f.lengths, "well segment lengths, comma separated");

    auto* peaks = app.add_subcommand("peaks", "refined tau* peaks along g00/B for two-site clusters");
    common(peaks, false);
    peaks->add_option("--g01", f.g01, "g01/B");
    peaks->add_option("--g11", f.g11, "g11/B");
    peaks->add_option("--lo", f.lo, "bracket lower end in g00/B");
    peaks->add_option("--hi", f.hi, "bracket upper end in g00/B");
    peaks->add_option("--tol", f.tol, "refinement tolerance");
    peaks->add_option("--grid", f.grid, "coarse grid points");

    auto* optimize = app.add_subcommand("optimize", "maximize tau* over real cluster couplings");
    common(optimize, false);
    optimize->add_option("--seed", f.seed, "upper triangle g00,g01,...,gNN over B");
    optimize->add_option("--max-iter", f.max_iter, "iteration cap");
    optimize->add_option("--scale", f.scale, "initial simplex scale");
    optimize->add_option("--tol", f.tol, "convergence tolerance on the tau* spread");

    auto* well = app.add_subcommand("well", "continuum well phase and delay, or an extrema scan over depth");
    common(well, false);
    well->add_option("--segments", f.segments, "depth:length pairs, left to right");
    well->add_option("--step", f.h, "central-difference step in alpha");
    well->add_option("--scan-segment", f.scan_segment, "segment whose depth is scanned");
    well->add_option("--lo", f.lo, "scan depth lower end");
    well->add_option("--hi", f.hi, "scan depth upper end");
    well->add_option("--grid", f.grid, "scan grid points");

    auto* enumerate = app.add_subcommand("enumerate", "rank every fixed-strength coupling topology");
    common(enumerate, false);
    enumerate->add_option("--n", f.n, "cluster sites beyond site 0 (1..6)");

    auto* simulate = app.add_subcommand("simulate", "wavepacket run with a bare-wall reference and delay fit");
    common(simulate, true);
    simulate->add_option("--chain-length", f.chain_length, "chain sites M");
    simulate->add_option("--center", f.center, "initial packet centre (negative site index)");
    simulate->add_option("--width", f.width, "packet width sigma in sites");
    simulate->add_option("--time", f.total_time, "total propagation time");
    simulate->add_option("--dt", f.sample_interval, "sampling interval");

    auto* extrema = app.add_subcommand("extrema", "one-site tau* maximum and minimum");
    common(extrema, false);

    if (argc > 1 && argv[1][0] != '-') {
        const auto subs = app.get_subcommands([&](CLI::App* c) { return c->get_name() == argv[1]; });
        if (subs.empty()) {
            err << "tdelay: unknown subcommand '" << argv[1]
                << "' (expected delay, sweep, peaks, optimize, well, enumerate, simulate or extrema)\n";
            return kExitConfig;
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        json cfg = merge_flags(command, load_config(f.config_path), f);
        fill_defaults(command, cfg);
        std::string csv;
        std::optional<std::string> fit_csv;
        if (command == "delay") csv = cmd_delay(cfg).str();
        else if (command == "sweep") csv = cmd_sweep(cfg).str();
        else if (command == "peaks") csv = cmd_peaks(cfg).str();
        else if (command == "optimize") csv = cmd_optimize(cfg).str();
        else if (command == "well") csv = cmd_well(cfg).str();
        else if (command == "enumerate") csv = cmd_enumerate(cfg).str();
        else if (command == "extrema") csv = cmd_extrema(cfg).str();
        else if (command == "simulate") {
            auto s = cmd_simulate(cfg);
            csv = s.trajectory.str();
            if (s.fit) fit_csv = s.fit->str();
        }

        if (f.output.empty()) {
            out << csv;
            if (fit_csv) err << *fit_csv;
        } else {
            if (f.output == f.config_path || f.output + ".json" == f.config_path)
                throw ConfigError("output would overwrite the config file '" + f.config_path + "'");
            write_file(f.output, csv);
            write_file(f.output + ".json", sidecar(command, cfg));
            if (fit_csv) write_file(f.output + ".fit.csv", *fit_csv);
        }
        return kExitOk;
    } catch (const InputError& e) {
        err << "tdelay " << command << ": configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        err << "tdelay " << command << ": configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "tdelay " << command << ": numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const WriteError& e) {
        err << "tdelay " << command << ": " << e.what() << "\n";
        return kExitNumerical;
    }
}

inline int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace tdelay::app
