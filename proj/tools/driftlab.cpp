// driftlab command-line front end.
//
//   driftlab simulate   --config cfg.json | --canned NAME   [--seed S] [--out DIR]
//   driftlab estimate   --config cfg.json --data ensemble.csv [--out DIR]
//   driftlab experiment --config cfg.json | --canned NAME | --table1 | --table2  [--threads K]
//   driftlab report     summary.json... [--out DIR]
//   driftlab calibrate  --config cfg.json | --canned NAME   [--grid 0.5,1,2,4]
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "driftlab/cli.hpp"

namespace fs = std::filesystem;
using namespace driftlab;

namespace {

struct Common {
    std::string config;
    std::string canned;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    std::string out;
    std::optional<std::size_t> reps;
};

void add_common(CLI::App* sub, Common& c, bool with_canned) {
    sub->add_option("--config", c.config, "JSON configuration file");
    if (with_canned) sub->add_option("--canned", c.canned, "ips | table1:H:delta | table2:gamma");
    sub->add_option("--seed", c.seed, "master seed (overrides config and DRIFTLAB_SEED)");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "output directory");
}

// Spec from --canned or --config, with seed precedence applied, plus the output directory.
std::pair<ExperimentSpec, fs::path> load_spec(const Common& c) {
    if (!c.canned.empty() && !c.config.empty()) throw ValidationError("give either --config or --canned, not both");
    if (c.canned.empty() && c.config.empty()) throw ValidationError("missing --config (or --canned)");
    ExperimentSpec spec;
    std::optional<std::uint64_t> cfg_seed;
    std::optional<std::string> cfg_out;
    if (!c.canned.empty()) {
        spec = canned_spec(c.canned);
    } else {
        const RunConfig rc = run_config_from_json(read_json_file(c.config));
        spec = rc.spec;
        if (rc.seed_given) cfg_seed = rc.spec.master_seed;
        cfg_out = rc.out_dir;
    }
    spec.master_seed = resolve_seed(c.seed, cfg_seed);
    if (c.reps) spec.reps = *c.reps;
    validate(spec);
    fs::path out = !c.out.empty() ? fs::path(c.out) : cfg_out ? fs::path(*cfg_out) : fs::path("driftlab_out");
    return {spec, out};
}

int run(int argc, char** argv) {
    CLI::App app{"driftlab: drift estimation from correlated copies"};
    app.require_subcommand(1);

    Common sim_opts, est_opts, exp_opts, cal_opts;
    std::string data_path;
    bool table1 = false, table2 = false;
    double table2_c = 2.0;
    std::vector<std::string> summaries;
    std::string report_out;
    std::vector<double> cal_grid = default_calibration_grid();

    auto* sim = app.add_subcommand("simulate", "simulate one ensemble, write ensemble.csv");
    add_common(sim, sim_opts, true);

    auto* est = app.add_subcommand("estimate", "estimate b, b' (and the drift) from an ensemble CSV");
    add_common(est, est_opts, true);
    est->add_option("--data", data_path, "ensemble CSV (t,x1..xN)")->required();

    auto* exp = app.add_subcommand("experiment", "run a Monte-Carlo experiment");
    add_common(exp, exp_opts, true);
    exp->add_option("--reps", exp_opts.reps, "override the replication count");
    exp->add_flag("--table1", table1, "all four segmented-fBm cells");
    exp->add_flag("--table2", table2, "all three correlated-GBM cells");
    exp->add_option("--c-cal", table2_c, "penalty constant for --table2");

    auto* rep = app.add_subcommand("report", "Markdown table from summary JSON files");
    rep->add_option("summaries", summaries, "summary JSON files")->required();
    rep->add_option("--out", report_out, "output directory (report.md); stdout otherwise");

    auto* cal = app.add_subcommand("calibrate", "sweep the penalty constant");
    add_common(cal, cal_opts, true);
    cal->add_option("--reps", cal_opts.reps, "override the replication count");
    cal->add_option("--grid", cal_grid, "candidate constants")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (sim->parsed()) {
        auto [spec, out] = load_spec(sim_opts);
        write_file_atomic(out / "ensemble.csv", ensemble_to_csv(cmd_simulate(spec)));
        write_file_atomic(out / "config.json", dump(spec_to_json(spec)));
        std::cout << (out / "ensemble.csv").string() << '\n';
    } else if (est->parsed()) {
        auto [spec, out] = load_spec(est_opts);
        const PathEnsemble data = ensemble_from_csv(read_file(data_path));
        const EstimateOutput e = cmd_estimate(spec, data);
        write_file_atomic(out / "estimate.csv", estimates_to_csv(e.b_hat, e.b_prime_hat, e.tt_b_hat));
        write_file_atomic(out / "selection.json", dump(selection_json(e)));
        std::cout << "m_hat = " << e.selection.m_hat << '\n';
    } else if (exp->parsed()) {
        if (table1 || table2) {
            if (table1 && table2) throw ValidationError("give one of --table1, --table2");
            if (!exp_opts.config.empty() || !exp_opts.canned.empty())
                throw ValidationError("--table1/--table2 take no --config or --canned");
            const std::uint64_t seed = resolve_seed(exp_opts.seed, std::nullopt);
            const fs::path out = exp_opts.out.empty() ? fs::path("driftlab_out") : fs::path(exp_opts.out);
            const json doc = table1 ? run_table(out, "table1.json", table1_cells(seed, exp_opts.reps), exp_opts.threads)
                                    : run_table(out, "table2.json", table2_cells(seed, table2_c, exp_opts.reps),
                                                exp_opts.threads);
            std::cout << cmd_report({doc});
        } else {
            auto [spec, out] = load_spec(exp_opts);
            const ExperimentReport r = run_experiment(spec, exp_opts.threads);
            write_experiment(out, r);
            std::cout << "mean_mise = " << format_double(r.aggregates.mise.mean)
                      << "  std_mise = " << format_double(r.aggregates.mise.std) << "  ("
                      << r.runtime_seconds << " s)\n";
        }
    } else if (rep->parsed()) {
        std::vector<json> docs;
        for (const auto& p : summaries) docs.push_back(read_json_file(p));
        const std::string md = cmd_report(docs);
        if (report_out.empty())
            std::cout << md;
        else
            write_file_atomic(fs::path(report_out) / "report.md", md);
    } else if (cal->parsed()) {
        auto [spec, out] = load_spec(cal_opts);
        const CalibrationResult r = calibrate(spec, cal_grid, cal_opts.threads);
        write_file_atomic(out / "calibration.json", dump(calibration_json(spec, r)));
        std::cout << "c_cal = " << format_double(r.chosen) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const IoError& e) {
        std::cerr << "driftlab: I/O error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "driftlab: I/O error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "driftlab: " << e.what() << '\n';
        return 1;
    }
}
