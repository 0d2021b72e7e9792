#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/io.hpp"

namespace driftlab {

// --- seed and spec resolution --------------------------------------------------

inline std::uint64_t parse_seed(const std::string& text, const std::string& source) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end || text.empty())
        throw ValidationError(source + ": seed must be an unsigned 64-bit integer, got '" + text + "'");
    return v;
}

// --seed, then the config's seed, then $DRIFTLAB_SEED, then kDefaultSeed.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config,
                                  const char* env_value) {
    if (flag) return *flag;
    if (config) return *config;
    if (env_value && *env_value) return parse_seed(env_value, "DRIFTLAB_SEED");
    return kDefaultSeed;
}

inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config) {
    return resolve_seed(flag, config, std::getenv("DRIFTLAB_SEED"));
}

// "ips", "table1:H:delta", "table2:gamma".
inline ExperimentSpec canned_spec(const std::string& name) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= name.size(); ++i)
        if (i == name.size() || name[i] == ':') {
            parts.push_back(name.substr(start, i - start));
            start = i + 1;
        }
    try {
        if (parts.size() == 1 && parts[0] == "ips") return canned_ips();
        if (parts.size() == 3 && parts[0] == "table1")
            return canned_table1(parse_double(parts[1]), static_cast<int>(parse_seed(parts[2], "canned delta")));
        if (parts.size() == 2 && parts[0] == "table2") return canned_table2(parse_double(parts[1]));
    } catch (const IoError& e) {
        throw ValidationError(std::string("canned spec: ") + e.what());
    }
    throw ValidationError("unknown canned spec '" + name + "' (use ips, table1:H:delta or table2:gamma)");
}

// --- simulate -------------------------------------------------------------------

// One ensemble from replication stream 0.
inline PathEnsemble cmd_simulate(const ExperimentSpec& spec) {
    validate(spec);
    const ScenarioSimulator sim(spec.scenario, spec.grid(), spec.copies);
    RngStream rng(spec.master_seed, 0);
    return sim.simulate(rng).x;
}

// --- estimate -------------------------------------------------------------------

struct EstimateOutput {
    EstimateFn b_hat;
    EstimateFn b_prime_hat;
    std::optional<EstimateFn> tt_b_hat;
    SelectionResult selection;
    ExperimentSpec spec;  // spec with grid and copy count taken from the data
};

/// Estimates from data on any uniform grid. The grid and N come from the data;
/// the scenario supplies R_N (unless overridden) and the drift back-transform.
inline EstimateOutput cmd_estimate(ExperimentSpec spec, const PathEnsemble& data) {
    spec.horizon = data.grid().horizon();
    spec.subintervals = data.grid().subintervals();
    spec.copies = data.count();
    spec.pipeline = Pipeline::derivative;
    validate(spec);
    const double rate = experiment_rate(spec);
    const TrigBasis basis(spec.horizon, spec.basis_dim);
    EstimateFn b = estimate_b(data);
    const CoefficientVector coeffs = compute_coefficients(b.values, basis, spec.basis_dim);
    auto [bp, sel] = adaptive_estimate(coeffs, spec.candidates, rate, spec.c_cal);
    std::optional<EstimateFn> tt;
    if (const auto* g = std::get_if<GbmCorrelated>(&spec.scenario.model))
        tt = gbm_drift_estimate(bp, g->sigma);
    else if (std::holds_alternative<InteractingParticles>(spec.scenario.model))
        tt = ips_backtransform(b);
    return EstimateOutput{std::move(b), std::move(bp), std::move(tt), std::move(sel), std::move(spec)};
}

inline json selection_json(const EstimateOutput& e) {
    json j;
    j["m_hat"] = e.selection.m_hat;
    j["candidates"] = {e.selection.candidates.lo, e.selection.candidates.hi};
    j["criterion"] = e.selection.criterion;
    j["c_cal"] = e.selection.c_cal;
    j["rate"] = e.selection.rate;
    j["coefficients"] = e.b_prime_hat.coefficients;
    j["config"] = spec_to_json(e.spec);
    return j;
}

// --- experiment -----------------------------------------------------------------

inline std::string table1_cell_name(const ExperimentSpec& s) {
    const auto& seg = std::get<SegmentedFbm>(s.scenario.model);
    return "H" + format_double(seg.hurst) + "_delta" + std::to_string(seg.delta);
}

inline std::string table2_cell_name(const ExperimentSpec& s) {
    const auto& g = std::get<GbmCorrelated>(s.scenario.model);
    return "gamma" + format_double(g.correlation.toeplitz_gamma.value_or(0.0));
}

// report.csv, criteria.csv (projection pipeline), summary.json, config.json, runtime.json.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentReport& rep) {
    write_file_atomic(dir / "report.csv", records_to_csv(rep.records));
    if (rep.spec.pipeline == Pipeline::derivative) write_file_atomic(dir / "criteria.csv", criteria_to_csv(rep));
    write_file_atomic(dir / "config.json", dump(spec_to_json(rep.spec)));
    write_file_atomic(dir / "summary.json", dump(summary_json(rep)));
    write_file_atomic(dir / "runtime.json", dump(runtime_json(rep)));
}

// Runs several cells and writes each under dir/<name>/, plus dir/<file> holding all summaries.
inline json run_table(const std::filesystem::path& dir, const std::string& file,
                      const std::vector<std::pair<std::string, ExperimentSpec>>& cells, std::size_t threads) {
    json all = json::array();
    for (const auto& [name, spec] : cells) {
        const ExperimentReport rep = run_experiment(spec, threads);
        write_experiment(dir / name, rep);
        all.push_back(summary_json(rep));
    }
    json doc{{"summaries", all}};
    write_file_atomic(dir / file, dump(doc));
    return doc;
}

inline std::vector<std::pair<std::string, ExperimentSpec>> table1_cells(std::uint64_t seed,
                                                                        std::optional<std::size_t> reps) {
    std::vector<std::pair<std::string, ExperimentSpec>> cells;
    for (double h : {0.6, 0.9})
        for (int d : {1, 2}) {
            ExperimentSpec s = canned_table1(h, d);
            s.master_seed = seed;
            if (reps) s.reps = *reps;
            cells.emplace_back(table1_cell_name(s), s);
        }
    return cells;
}

inline std::vector<std::pair<std::string, ExperimentSpec>> table2_cells(std::uint64_t seed, double c_cal,
                                                                        std::optional<std::size_t> reps) {
    std::vector<std::pair<std::string, ExperimentSpec>> cells;
    for (double g : {0.0, 0.5, 0.75}) {
        ExperimentSpec s = canned_table2(g);
        s.master_seed = seed;
        s.c_cal = c_cal;
        if (reps) s.reps = *reps;
        cells.emplace_back(table2_cell_name(s), s);
    }
    return cells;
}

// --- calibrate ------------------------------------------------------------------

inline json calibration_json(const ExperimentSpec& spec, const CalibrationResult& r) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.grid.size(); ++i)
        rows.push_back({{"c_cal", r.grid[i]},
                        {"mean_mise", r.mise[i].mean},
                        {"std_mise", r.mise[i].std},
                        {"mean_m_hat", r.m_hat[i].mean},
                        {"std_m_hat", r.m_hat[i].std}});
    return json{{"library", "driftlab"}, {"version", kLibraryVersion}, {"chosen", r.chosen},
                {"grid", rows},          {"seed", spec.master_seed},   {"config", spec_to_json(spec)}};
}

// --- report ---------------------------------------------------------------------

namespace detail {

inline std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

inline std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

inline void require_summary(const json& s) {
    for (const char* k : {"scenario", "pipeline", "seed", "mean_mise", "std_mise", "config"})
        if (!s.contains(k)) throw ValidationError(std::string("summary is missing '") + k + "'");
}

inline std::string mise_cell(const json& s) {
    return sci(s.at("mean_mise").get<double>()) + " (" + sci(s.at("std_mise").get<double>()) + ")";
}

inline std::string seed_footnote(const std::vector<std::pair<std::string, const json*>>& labelled) {
    std::set<std::uint64_t> seeds;
    for (const auto& [_, s] : labelled) seeds.insert(s->at("seed").get<std::uint64_t>());
    if (seeds.size() <= 1) return "";
    std::string out = "\nSeeds differ across cells:\n";
    for (const auto& [label, s] : labelled)
        out += "- " + label + ": " + std::to_string(s->at("seed").get<std::uint64_t>()) + "\n";
    return out;
}

inline bool all_of_kind(const std::vector<json>& ss, const char* scenario, const char* pipeline) {
    return std::all_of(ss.begin(), ss.end(), [&](const json& s) {
        return s.at("scenario") == scenario && s.at("pipeline") == pipeline;
    });
}

inline std::string report_table1(const std::vector<json>& ss) {
    std::map<std::pair<double, int>, const json*> cells;
    std::set<double> hs;
    std::set<int> ds;
    for (const auto& s : ss) {
        const json& sc = s.at("config").at("scenario");
        const double h = sc.at("hurst").get<double>();
        const int d = sc.at("delta").get<int>();
        if (!cells.emplace(std::pair{h, d}, &s).second)
            throw ValidationError("report: duplicate cell H = " + format_double(h) + ", delta = " + std::to_string(d));
        hs.insert(h);
        ds.insert(d);
    }
    std::string out = "Mean and StD (in parentheses) of MISE(b_hat)\n\n|       |";
    for (int d : ds) out += " delta = " + std::to_string(d) + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < ds.size(); ++i) out += "---|";
    out += '\n';
    std::vector<std::pair<std::string, const json*>> labelled;
    for (double h : hs) {
        out += "| H = " + format_double(h) + " |";
        for (int d : ds) {
            const auto it = cells.find({h, d});
            if (it == cells.end()) {
                out += " missing |";
                continue;
            }
            out += ' ' + mise_cell(*it->second) + " |";
            labelled.emplace_back("H = " + format_double(h) + ", delta = " + std::to_string(d), it->second);
        }
        out += '\n';
    }
    return out + seed_footnote(labelled);
}

inline std::string report_table2(const std::vector<json>& ss) {
    std::map<double, const json*> cells;
    for (const auto& s : ss) {
        const double g = s.at("config").at("scenario").at("correlation").at("toeplitz").get<double>();
        if (!cells.emplace(g, &s).second) throw ValidationError("report: duplicate cell gamma = " + format_double(g));
    }
    auto row = [&](const std::string& label, const char* key, bool sci_fmt) {
        std::string r = "| " + label + " |";
        for (const auto& [g, s] : cells) {
            if (!s->contains(key)) {
                r += " missing |";
                continue;
            }
            const double v = s->at(key).get<double>();
            r += ' ' + (sci_fmt ? sci(v) : fixed(v)) + " |";
        }
        return r + '\n';
    };
    std::string out = "Means and StD of MISE(b_hat') and m_hat\n\n|       |";
    for (const auto& [g, _] : cells) out += " gamma = " + format_double(g) + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < cells.size(); ++i) out += "---|";
    out += '\n';
    out += row("Mean MISE", "mean_mise", true);
    out += row("StD MISE", "std_mise", true);
    out += row("Mean m_hat", "mean_m_hat", false);
    out += row("StD m_hat", "std_m_hat", false);
    std::vector<std::pair<std::string, const json*>> labelled;
    for (const auto& [g, s] : cells) labelled.emplace_back("gamma = " + format_double(g), s);
    return out + seed_footnote(labelled);
}

inline std::string report_generic(const std::vector<json>& ss) {
    std::string out = "| scenario | pipeline | reps | MISE mean (std) | m_hat mean (std) |\n|---|---|---|---|---|\n";
    std::vector<std::pair<std::string, const json*>> labelled;
    for (std::size_t i = 0; i < ss.size(); ++i) {
        const json& s = ss[i];
        std::string m = "n/a";
        if (s.contains("mean_m_hat"))
            m = fixed(s.at("mean_m_hat").get<double>()) + " (" + fixed(s.at("std_m_hat").get<double>()) + ")";
        out += "| " + s.at("scenario").get<std::string>() + " | " + s.at("pipeline").get<std::string>() + " | " +
               std::to_string(s.value("reps", 0)) + " | " + mise_cell(s) + " | " + m + " |\n";
        labelled.emplace_back("row " + std::to_string(i + 1), &s);
    }
    return out + seed_footnote(labelled);
}

}  // namespace detail

// Flattens summary documents: a single summary or {"summaries": [...]}.
inline std::vector<json> collect_summaries(const std::vector<json>& docs) {
    std::vector<json> out;
    for (const auto& d : docs) {
        if (d.is_object() && d.contains("summaries")) {
            for (const auto& s : d.at("summaries")) out.push_back(s);
        } else {
            out.push_back(d);
        }
    }
    return out;
}

/**
 * Markdown table for a set of summaries.
 * Segmented-fBm mean-path summaries use the H x delta layout; correlated-GBM
 * projection summaries use the gamma columns layout; anything else, or a
 * single summary, gets one row per summary.
 */
inline std::string cmd_report(const std::vector<json>& docs) {
    const std::vector<json> ss = collect_summaries(docs);
    if (ss.empty()) throw ValidationError("report: no summaries given");
    for (const auto& s : ss) detail::require_summary(s);
    if (ss.size() > 1 && detail::all_of_kind(ss, "segmented_fbm", "mean_b")) return detail::report_table1(ss);
    if (ss.size() > 1 && detail::all_of_kind(ss, "gbm_correlated", "derivative") &&
        std::all_of(ss.begin(), ss.end(),
                    [](const json& s) { return s.at("config").at("scenario").at("correlation").contains("toeplitz"); }))
        return detail::report_table2(ss);
    return detail::report_generic(ss);
}

}  // namespace driftlab
