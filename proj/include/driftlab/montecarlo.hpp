#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "driftlab/basis.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/estimators.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/scenarios.hpp"
#include "driftlab/selection.hpp"

namespace driftlab {

inline constexpr std::uint64_t kDefaultSeed = 12345;

enum class Pipeline { mean_b, derivative, ips_backtransform };

inline const char* to_string(Pipeline p) {
    switch (p) {
        case Pipeline::mean_b: return "mean_b";
        case Pipeline::derivative: return "derivative";
        case Pipeline::ips_backtransform: return "ips_backtransform";
    }
    return "?";
}

struct ExperimentSpec {
    ScenarioConfig scenario{GbmCorrelated{}};
    double horizon = 1.0;
    std::size_t subintervals = 150;
    std::size_t copies = 100;
    std::size_t reps = 100;
    Pipeline pipeline = Pipeline::mean_b;
    std::size_t basis_dim = 12;
    CandidateRange candidates{2, 12};
    double c_cal = 2.0;
    std::optional<double> rate_override;  // user-supplied R_N; oracle Gamma otherwise
    std::uint64_t master_seed = kDefaultSeed;

    TimeGrid grid() const { return TimeGrid(horizon, subintervals); }
};

inline void validate(const ExperimentSpec& spec) {
    detail::require(spec.reps >= 1, "experiment: reps must be >= 1");
    (void)spec.grid();
    validate(spec.scenario, spec.copies);
    if (spec.pipeline == Pipeline::ips_backtransform)
        detail::require(std::holds_alternative<InteractingParticles>(spec.scenario.model),
                        "experiment: the ips_backtransform pipeline needs the interacting_particles scenario");
    if (spec.pipeline == Pipeline::derivative) {
        detail::require(!spec.candidates.empty(), "experiment: candidate set is empty");
        detail::require(spec.candidates.hi <= spec.basis_dim, "experiment: largest candidate exceeds the basis dimension");
        detail::require(std::isfinite(spec.c_cal) && spec.c_cal > 0.0, "experiment: c_cal must be positive");
        if (2 * spec.basis_dim >= spec.subintervals)
            throw AliasingError("experiment: basis dimension " + std::to_string(spec.basis_dim) +
                                " needs M < n/2 with n = " + std::to_string(spec.subintervals));
    }
    if (spec.rate_override) detail::require(*spec.rate_override >= 0.0, "experiment: R_N must be nonnegative");
}

// Rate used inside the penalty: user value if given, else R_N of the scenario's Gamma.
inline double experiment_rate(const ExperimentSpec& spec) {
    if (spec.rate_override) return *spec.rate_override;
    return risk_rate(gamma_matrix(spec.scenario, spec.horizon, spec.copies));
}

struct ReplicationRecord {
    std::size_t rep = 0;
    double mise = 0.0;
    std::optional<std::size_t> m_hat;
    std::vector<double> criterion;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
    bool std_defined = true;  // false when computed from a single value (std reported as 0)
};

// Sample mean and sample standard deviation (divisor count - 1).
inline MeanStd aggregate(const std::vector<double>& xs) {
    detail::require(!xs.empty(), "aggregate: no records");
    MeanStd r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(xs.size());
    if (xs.size() == 1) {
        r.std = 0.0;
        r.std_defined = false;
        return r;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return r;
}

struct Aggregates {
    MeanStd mise;
    std::optional<MeanStd> m_hat;
};

inline Aggregates aggregate(const std::vector<ReplicationRecord>& records) {
    detail::require(!records.empty(), "aggregate: no records");
    std::vector<double> mises, ms;
    for (const auto& r : records) {
        mises.push_back(r.mise);
        if (r.m_hat) ms.push_back(static_cast<double>(*r.m_hat));
    }
    Aggregates a{aggregate(mises), std::nullopt};
    if (!ms.empty()) a.m_hat = aggregate(ms);
    return a;
}

struct ExperimentReport {
    ExperimentSpec spec;
    double rate = 0.0;
    std::vector<ReplicationRecord> records;  // sorted by rep
    Aggregates aggregates;
    double runtime_seconds = 0.0;
};

namespace detail {

inline ReplicationRecord run_replication(const ExperimentSpec& spec, const ScenarioSimulator& sim,
                                         const ScenarioTruth& truth, double rate, std::size_t rep) {
    RngStream rng(spec.master_seed, rep);
    const ScenarioSimulator::Output out = sim.simulate(rng);
    ReplicationRecord rec;
    rec.rep = rep;
    switch (spec.pipeline) {
        case Pipeline::mean_b:
            rec.mise = mise(estimate_b(out.x), truth.b0);
            break;
        case Pipeline::ips_backtransform:
            rec.mise = mise(ips_backtransform(estimate_b(out.x)), *truth.drift);
            break;
        case Pipeline::derivative: {
            const TrigBasis basis(spec.horizon, spec.basis_dim);
            const CoefficientVector coeffs = compute_coefficients(out.x, basis, spec.basis_dim);
            auto [est, sel] = adaptive_estimate(coeffs, spec.candidates, rate, spec.c_cal);
            if (const auto* g = std::get_if<GbmCorrelated>(&spec.scenario.model))
                rec.mise = mise(gbm_drift_estimate(est, g->sigma), *truth.drift);
            else
                rec.mise = mise(est, truth.b0_prime);
            rec.m_hat = sel.m_hat;
            rec.criterion = std::move(sel.criterion);
            break;
        }
    }
    return rec;
}

}  // namespace detail

/**
 * Runs spec.reps independent replications. Replication r draws from
 * RngStream(master_seed, r), so the report does not depend on `threads`.
 * Errors are rethrown for the lowest failing replication, annotated with its id.
 */
inline ExperimentReport run_experiment(const ExperimentSpec& spec, std::size_t threads = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(spec);
    const double rate = experiment_rate(spec);
    const ScenarioSimulator sim(spec.scenario, spec.grid(), spec.copies);
    const ScenarioTruth tr = truth(spec.scenario, spec.horizon);

    std::vector<ReplicationRecord> records(spec.reps);
    std::vector<std::exception_ptr> errors(spec.reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < spec.reps; r = next++) {
            try {
                records[r] = detail::run_replication(spec, sim, tr, rate, r);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const std::size_t k = std::clamp<std::size_t>(threads, 1, spec.reps);
    if (k == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(k);
        for (std::size_t i = 0; i < k; ++i) pool.emplace_back(worker);
    }
    for (std::size_t r = 0; r < spec.reps; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const ValidationError& e) {
            throw ValidationError("replication " + std::to_string(r) + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error("replication " + std::to_string(r) + ": " + e.what());
        }
    }

    ExperimentReport rep{spec, rate, std::move(records), {}, 0.0};
    rep.aggregates = aggregate(rep.records);
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// --- calibration of the penalty constant --------------------------------------

inline const std::vector<double>& default_calibration_grid() {
    static const std::vector<double> grid{0.5, 1.0, 2.0, 4.0};
    return grid;
}

struct CalibrationResult {
    std::vector<double> grid;
    std::vector<MeanStd> mise;      // per grid value
    std::vector<MeanStd> m_hat;     // per grid value
    double chosen = 0.0;            // grid value with the smallest mean MISE (smallest c on ties)
};

// Sweeps c_cal over the grid on the same simulated data (same seed) and picks the best mean MISE.
inline CalibrationResult calibrate(const ExperimentSpec& spec, const std::vector<double>& grid = default_calibration_grid(),
                                   std::size_t threads = 1) {
    detail::require(spec.pipeline == Pipeline::derivative, "calibrate: needs the derivative pipeline");
    detail::require(!grid.empty(), "calibrate: empty grid");
    CalibrationResult res;
    res.grid = grid;
    std::sort(res.grid.begin(), res.grid.end());
    double best = 0.0;
    for (std::size_t i = 0; i < res.grid.size(); ++i) {
        ExperimentSpec s = spec;
        s.c_cal = res.grid[i];
        const ExperimentReport r = run_experiment(s, threads);
        res.mise.push_back(r.aggregates.mise);
        res.m_hat.push_back(*r.aggregates.m_hat);
        if (i == 0 || r.aggregates.mise.mean < best) {
            best = r.aggregates.mise.mean;
            res.chosen = res.grid[i];
        }
    }
    return res;
}

// --- canned configurations of the reference experiments ------------------------

// Interacting particles: N = 100, n = 150, T = 1, Y0 = 5, sigma = 0.5, drift t^2, 100 reps.
inline ExperimentSpec canned_ips() {
    ExperimentSpec s;
    s.scenario = ScenarioConfig{InteractingParticles{5.0, 0.5, Polynomial::monomial(2)}};
    s.horizon = 1.0;
    s.subintervals = 150;
    s.copies = 100;
    s.reps = 100;
    s.pipeline = Pipeline::ips_backtransform;
    return s;
}

// Segmented long fBm path: T = 1, N = 50, n = 50 per period, Delta = delta*T, b0 = t^2 periodic.
inline ExperimentSpec canned_table1(double hurst, int delta) {
    ExperimentSpec s;
    s.scenario = ScenarioConfig{SegmentedFbm{hurst, 0.5, delta, Polynomial::monomial(2)}};
    s.horizon = 1.0;
    s.subintervals = 50;
    s.copies = 50;
    s.reps = 100;
    s.pipeline = Pipeline::mean_b;
    return s;
}

// Correlated GBM copies: N = 100, n = 150, sigma = 0.5, drift Id, Gamma* = (gamma^{|i-k|}),
// trig basis M = 12, m selected in {2..12}.
inline ExperimentSpec canned_table2(double gamma) {
    ExperimentSpec s;
    s.scenario = ScenarioConfig{GbmCorrelated{1.0, 0.5, Polynomial::identity(), CorrelationSpec::toeplitz(gamma)}};
    s.horizon = 1.0;
    s.subintervals = 150;
    s.copies = 100;
    s.reps = 100;
    s.pipeline = Pipeline::derivative;
    s.basis_dim = 12;
    s.candidates = {2, 12};
    s.c_cal = 2.0;
    return s;
}

}  // namespace driftlab
