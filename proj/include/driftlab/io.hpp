#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "driftlab/errors.hpp"
#include "driftlab/estimators.hpp"
#include "driftlab/grid.hpp"
#include "driftlab/montecarlo.hpp"
#include "driftlab/scenarios.hpp"

namespace driftlab {

inline constexpr const char* kLibraryVersion = "0.1.0";

using json = nlohmann::json;

// --- numbers ----------------------------------------------------------------

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError("not a number: '" + std::string(s) + "'");
    return v;
}

// --- files --------------------------------------------------------------------

// Writes to "<path>.tmp" and renames over <path>.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

// --- CSV: ensembles and estimates ---------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        if (!line.empty()) out.push_back(line);
        start = end + 1;
    }
    return out;
}

// Rebuilds the uniform grid from a t column: t_0 = 0, T = last value, uniform spacing.
inline TimeGrid grid_from_times(const std::vector<double>& t) {
    if (t.size() < 2) throw IoError("CSV needs at least two time rows");
    const std::size_t n = t.size() - 1;
    const double horizon = t.back();
    if (t.front() != 0.0 || !(horizon > 0.0)) throw IoError("CSV time column must start at 0 and increase");
    const TimeGrid grid(horizon, n);
    for (std::size_t l = 0; l <= n; ++l)
        if (std::abs(t[l] - grid.point(l)) > 1e-9 * horizon)
            throw IoError("CSV time column is not the uniform grid l*T/n at row " + std::to_string(l));
    return grid;
}

}  // namespace detail

/// Ensemble CSV: header "t,x1,...,xN", one row per grid point, shortest round-trip decimals.
inline std::string ensemble_to_csv(const PathEnsemble& e) {
    std::string out = "t";
    for (std::size_t i = 1; i <= e.count(); ++i) out += ",x" + std::to_string(i);
    out += '\n';
    for (std::size_t l = 0; l < e.grid().size(); ++l) {
        out += format_double(e.grid().point(l));
        for (const auto& p : e) {
            out += ',';
            out += format_double(p[l]);
        }
        out += '\n';
    }
    return out;
}

inline PathEnsemble ensemble_from_csv(std::string_view text) {
    const auto lines = detail::lines_of(text);
    if (lines.empty()) throw IoError("empty ensemble CSV");
    const auto header = detail::split_csv_line(lines.front());
    if (header.size() < 2 || detail::trim(header[0]) != "t")
        throw IoError("ensemble CSV header must be 't,x1,...,xN'");
    for (std::size_t i = 1; i < header.size(); ++i)
        if (detail::trim(header[i]) != "x" + std::to_string(i))
            throw IoError("ensemble CSV header column " + std::to_string(i + 1) + " must be x" + std::to_string(i));
    const std::size_t n_paths = header.size() - 1;
    std::vector<double> t;
    std::vector<std::vector<double>> cols(n_paths);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = detail::split_csv_line(lines[r]);
        if (cells.size() != header.size())
            throw IoError("ensemble CSV row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(header.size()));
        t.push_back(parse_double(cells[0]));
        for (std::size_t i = 0; i < n_paths; ++i) cols[i].push_back(parse_double(cells[i + 1]));
    }
    const TimeGrid grid = detail::grid_from_times(t);
    std::vector<SampledPath> paths;
    paths.reserve(n_paths);
    for (auto& c : cols) paths.emplace_back(grid, std::move(c));
    return PathEnsemble(grid, std::move(paths));
}

// Estimate CSV "t,b_hat,b_prime_hat[,tt_b_hat]".
inline std::string estimates_to_csv(const EstimateFn& b_hat, const EstimateFn& b_prime_hat,
                                    const std::optional<EstimateFn>& tt_b_hat) {
    const TimeGrid& grid = b_hat.values.grid();
    std::string out = tt_b_hat ? "t,b_hat,b_prime_hat,tt_b_hat\n" : "t,b_hat,b_prime_hat\n";
    for (std::size_t l = 0; l < grid.size(); ++l) {
        out += format_double(grid.point(l)) + ',' + format_double(b_hat.values[l]) + ',' +
               format_double(b_prime_hat.values[l]);
        if (tt_b_hat) out += ',' + format_double(tt_b_hat->values[l]);
        out += '\n';
    }
    return out;
}

// --- configuration ------------------------------------------------------------

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + "." + key + ": wrong type");
    }
}

inline Polynomial poly_or(const json& j, const char* key, Polynomial fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_array()) throw ValidationError(where + "." + key + ": expected an array of polynomial coefficients");
    std::vector<double> c;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError(where + "." + key + ": coefficients must be numbers");
        c.push_back(x.get<double>());
    }
    return Polynomial(std::move(c));
}

inline ScenarioConfig scenario_from_json(const json& j) {
    const std::string where = "scenario";
    if (!j.is_object() || !j.contains("type")) throw ValidationError("scenario: missing 'type'");
    const std::string type = get_or<std::string>(j, "type", "", where);
    ScenarioConfig cfg{GbmCorrelated{}};
    cfg.noise_free = get_or<bool>(j, "noise_free", false, where);
    if (type == "gbm_correlated") {
        reject_unknown(j, {"type", "noise_free", "s0", "sigma", "drift", "correlation"}, where);
        GbmCorrelated g;
        g.s0 = get_or<double>(j, "s0", g.s0, where);
        g.sigma = get_or<double>(j, "sigma", g.sigma, where);
        g.drift = poly_or(j, "drift", g.drift, where);
        if (j.contains("correlation")) {
            const json& c = j.at("correlation");
            reject_unknown(c, {"toeplitz", "matrix"}, "scenario.correlation");
            if (c.contains("toeplitz") == c.contains("matrix"))
                throw ValidationError("scenario.correlation: give exactly one of 'toeplitz' or 'matrix'");
            if (c.contains("toeplitz")) {
                g.correlation = CorrelationSpec::toeplitz(get_or<double>(c, "toeplitz", 0.0, "scenario.correlation"));
            } else {
                const json& m = c.at("matrix");
                if (!m.is_array() || m.empty()) throw ValidationError("scenario.correlation.matrix: expected a square array");
                const auto n = static_cast<Eigen::Index>(m.size());
                Eigen::MatrixXd mat(n, n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const json& row = m.at(static_cast<std::size_t>(i));
                    if (!row.is_array() || row.size() != m.size())
                        throw ValidationError("scenario.correlation.matrix: expected a square array");
                    for (Eigen::Index k = 0; k < n; ++k) mat(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
                }
                g.correlation = CorrelationSpec::from_matrix(CorrelationMatrix(std::move(mat)));
            }
        }
        cfg.model = g;
    } else if (type == "fractional_random_effect") {
        reject_unknown(j, {"type", "noise_free", "c0", "sigma", "sigma_phi", "hurst", "drift"}, where);
        FractionalRandomEffect f;
        f.c0 = get_or<double>(j, "c0", f.c0, where);
        f.sigma = get_or<double>(j, "sigma", f.sigma, where);
        f.sigma_phi = get_or<double>(j, "sigma_phi", f.sigma_phi, where);
        f.hurst = get_or<double>(j, "hurst", f.hurst, where);
        f.drift = poly_or(j, "drift", f.drift, where);
        cfg.model = f;
    } else if (type == "interacting_particles") {
        reject_unknown(j, {"type", "noise_free", "y0", "sigma", "drift"}, where);
        InteractingParticles p;
        p.y0 = get_or<double>(j, "y0", p.y0, where);
        p.sigma = get_or<double>(j, "sigma", p.sigma, where);
        p.drift = poly_or(j, "drift", p.drift, where);
        cfg.model = p;
    } else if (type == "segmented_fbm") {
        reject_unknown(j, {"type", "noise_free", "hurst", "sigma", "delta", "b0"}, where);
        SegmentedFbm s;
        s.hurst = get_or<double>(j, "hurst", s.hurst, where);
        s.sigma = get_or<double>(j, "sigma", s.sigma, where);
        s.delta = get_or<int>(j, "delta", s.delta, where);
        s.b0 = poly_or(j, "b0", s.b0, where);
        cfg.model = s;
    } else {
        throw ValidationError("scenario: unknown type '" + type + "'");
    }
    return cfg;
}

inline json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["type"] = scenario_name(cfg.model);
    j["noise_free"] = cfg.noise_free;
    std::visit(overloaded{
                   [&](const GbmCorrelated& g) {
                       j["s0"] = g.s0;
                       j["sigma"] = g.sigma;
                       j["drift"] = g.drift.coefficients();
                       if (g.correlation.explicit_matrix) {
                           const auto& m = g.correlation.explicit_matrix->matrix();
                           json rows = json::array();
                           for (Eigen::Index i = 0; i < m.rows(); ++i) {
                               json row = json::array();
                               for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
                               rows.push_back(row);
                           }
                           j["correlation"] = {{"matrix", rows}};
                       } else {
                           j["correlation"] = {{"toeplitz", g.correlation.toeplitz_gamma.value_or(0.0)}};
                       }
                   },
                   [&](const FractionalRandomEffect& f) {
                       j["c0"] = f.c0;
                       j["sigma"] = f.sigma;
                       j["sigma_phi"] = f.sigma_phi;
                       j["hurst"] = f.hurst;
                       j["drift"] = f.drift.coefficients();
                   },
                   [&](const InteractingParticles& p) {
                       j["y0"] = p.y0;
                       j["sigma"] = p.sigma;
                       j["drift"] = p.drift.coefficients();
                   },
                   [&](const SegmentedFbm& s) {
                       j["hurst"] = s.hurst;
                       j["sigma"] = s.sigma;
                       j["delta"] = s.delta;
                       j["b0"] = s.b0.coefficients();
                   },
               },
               cfg.model);
    return j;
}

inline Pipeline pipeline_from_string(const std::string& s) {
    if (s == "mean_b") return Pipeline::mean_b;
    if (s == "derivative") return Pipeline::derivative;
    if (s == "ips_backtransform") return Pipeline::ips_backtransform;
    throw ValidationError("estimator.pipeline: unknown pipeline '" + s + "'");
}

}  // namespace detail

/**
 * Parsed run configuration: the experiment plus output location.
 *
 * JSON layout (every block optional except "scenario"; unknown keys rejected):
 *   scenario   {type, noise_free, ...model parameters}
 *   grid       {horizon, subintervals}
 *   copies     N
 *   estimator  {pipeline, basis_dim}
 *   selection  {candidates: [lo, hi], c_cal, rate}
 *   experiment {reps}
 *   output     {dir}
 *   seed       master seed
 */
struct RunConfig {
    ExperimentSpec spec;
    std::optional<std::string> out_dir;
    bool seed_given = false;
};

inline RunConfig run_config_from_json(const json& j) {
    detail::reject_unknown(j, {"scenario", "grid", "copies", "estimator", "selection", "experiment", "output", "seed"},
                           "config");
    RunConfig rc;
    ExperimentSpec& s = rc.spec;
    if (!j.contains("scenario")) throw ValidationError("config: missing 'scenario' block");
    s.scenario = detail::scenario_from_json(j.at("scenario"));
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        detail::reject_unknown(g, {"horizon", "subintervals"}, "grid");
        s.horizon = detail::get_or<double>(g, "horizon", s.horizon, "grid");
        s.subintervals = detail::get_or<std::size_t>(g, "subintervals", s.subintervals, "grid");
    }
    s.copies = detail::get_or<std::size_t>(j, "copies", s.copies, "config");
    if (j.contains("estimator")) {
        const json& e = j.at("estimator");
        detail::reject_unknown(e, {"pipeline", "basis_dim"}, "estimator");
        s.pipeline = detail::pipeline_from_string(detail::get_or<std::string>(e, "pipeline", "mean_b", "estimator"));
        s.basis_dim = detail::get_or<std::size_t>(e, "basis_dim", s.basis_dim, "estimator");
    }
    if (j.contains("selection")) {
        const json& sel = j.at("selection");
        detail::reject_unknown(sel, {"candidates", "c_cal", "rate"}, "selection");
        if (sel.contains("candidates")) {
            const json& c = sel.at("candidates");
            if (!c.is_array() || c.size() != 2) throw ValidationError("selection.candidates: expected [lo, hi]");
            s.candidates = CandidateRange{c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()};
        }
        s.c_cal = detail::get_or<double>(sel, "c_cal", s.c_cal, "selection");
        if (sel.contains("rate") && !sel.at("rate").is_null()) s.rate_override = detail::get_or<double>(sel, "rate", 0.0, "selection");
    }
    if (j.contains("experiment")) {
        const json& e = j.at("experiment");
        detail::reject_unknown(e, {"reps"}, "experiment");
        s.reps = detail::get_or<std::size_t>(e, "reps", s.reps, "experiment");
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        detail::reject_unknown(o, {"dir"}, "output");
        if (o.contains("dir")) rc.out_dir = detail::get_or<std::string>(o, "dir", "", "output");
    }
    if (j.contains("seed")) {
        s.master_seed = detail::get_or<std::uint64_t>(j, "seed", s.master_seed, "config");
        rc.seed_given = true;
    }
    validate(s);
    return rc;
}

// Fully resolved config; feeding it back through run_config_from_json reproduces the spec.
inline json spec_to_json(const ExperimentSpec& s) {
    json j;
    j["scenario"] = detail::scenario_to_json(s.scenario);
    j["grid"] = {{"horizon", s.horizon}, {"subintervals", s.subintervals}};
    j["copies"] = s.copies;
    j["estimator"] = {{"pipeline", to_string(s.pipeline)}, {"basis_dim", s.basis_dim}};
    j["selection"] = {{"candidates", {s.candidates.lo, s.candidates.hi}}, {"c_cal", s.c_cal},
                      {"rate", s.rate_override ? json(*s.rate_override) : json(nullptr)}};
    j["experiment"] = {{"reps", s.reps}};
    j["seed"] = s.master_seed;
    return j;
}

// --- reports ------------------------------------------------------------------

// Per-replication CSV "rep,mise,m_hat" (m_hat empty when not applicable).
inline std::string records_to_csv(const std::vector<ReplicationRecord>& records) {
    std::string out = "rep,mise,m_hat\n";
    for (const auto& r : records) {
        out += std::to_string(r.rep) + ',' + format_double(r.mise) + ',';
        if (r.m_hat) out += std::to_string(*r.m_hat);
        out += '\n';
    }
    return out;
}

// Criterion trace "rep,m,criterion" for the derivative pipeline.
inline std::string criteria_to_csv(const ExperimentReport& rep) {
    std::string out = "rep,m,criterion\n";
    for (const auto& r : rep.records)
        for (std::size_t k = 0; k < r.criterion.size(); ++k)
            out += std::to_string(r.rep) + ',' + std::to_string(rep.spec.candidates.lo + k) + ',' +
                   format_double(r.criterion[k]) + '\n';
    return out;
}

// Summary document. Deterministic given the spec; runtime is kept out (see runtime_json).
inline json summary_json(const ExperimentReport& rep) {
    json j;
    j["library"] = "driftlab";
    j["version"] = kLibraryVersion;
    j["scenario"] = scenario_name(rep.spec.scenario.model);
    j["pipeline"] = to_string(rep.spec.pipeline);
    j["reps"] = rep.spec.reps;
    j["seed"] = rep.spec.master_seed;
    j["rate"] = rep.rate;
    j["mean_mise"] = rep.aggregates.mise.mean;
    j["std_mise"] = rep.aggregates.mise.std;
    j["std_defined"] = rep.aggregates.mise.std_defined;
    if (rep.aggregates.m_hat) {
        j["mean_m_hat"] = rep.aggregates.m_hat->mean;
        j["std_m_hat"] = rep.aggregates.m_hat->std;
    }
    j["config"] = spec_to_json(rep.spec);
    return j;
}

inline json runtime_json(const ExperimentReport& rep) {
    return json{{"runtime_seconds", rep.runtime_seconds}, {"reps", rep.spec.reps}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace driftlab
