#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "driftlab/errors.hpp"
#include "driftlab/grid.hpp"
#include "driftlab/noise.hpp"
#include "driftlab/polynomial.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

// How the copy-correlation matrix of the GBM scenario is specified.
// Materialized for a given N because the copy count lives on the experiment.
struct CorrelationSpec {
    std::optional<double> toeplitz_gamma = 0.0;
    std::optional<CorrelationMatrix> explicit_matrix;

    static CorrelationSpec toeplitz(double gamma) { return CorrelationSpec{gamma, std::nullopt}; }
    static CorrelationSpec from_matrix(CorrelationMatrix m) { return CorrelationSpec{std::nullopt, std::move(m)}; }

    CorrelationMatrix materialize(std::size_t n) const {
        if (explicit_matrix) {
            if (explicit_matrix->size() != n)
                throw ValidationError("correlation matrix has size " + std::to_string(explicit_matrix->size()) +
                                      " but the experiment uses " + std::to_string(n) + " copies");
            return *explicit_matrix;
        }
        return toeplitz_corr(toeplitz_gamma.value_or(0.0), n);
    }
};

// S^i = S0 exp(X^i), X^i = int_0^t (drift - sigma^2/2) + sigma W^i, W correlated through Gamma*.
struct GbmCorrelated {
    double s0 = 1.0;
    double sigma = 0.5;
    Polynomial drift = Polynomial::identity();
    CorrelationSpec correlation;
};

// X^i = int_0^t drift + phi^i t + sigma B^i, phi^i ~ N(0, sigma_phi^2), B^i fBm(H), H in (1/2,1).
struct FractionalRandomEffect {
    double c0 = 1.0;
    double sigma = 1.0;
    double sigma_phi = 1.0;
    double hurst = 0.75;
    Polynomial drift = Polynomial::identity();
};

// Mean-coupled particles dY^i = (drift'(t) - (Y^i - mean Y)) dt + sigma dW^i, drift(0) = 0.
struct InteractingParticles {
    double y0 = 5.0;
    double sigma = 0.5;
    Polynomial drift = Polynomial::monomial(2);
};

// Copies cut out of one long drifted fBm path with forgetting period Delta = delta*T.
// b0 is T-periodic, equal to the polynomial on [0,T), with b0(0) = 0.
struct SegmentedFbm {
    double hurst = 0.6;
    double sigma = 0.5;
    int delta = 2;
    Polynomial b0 = Polynomial::monomial(2);
};

using ScenarioModel = std::variant<GbmCorrelated, FractionalRandomEffect, InteractingParticles, SegmentedFbm>;

struct ScenarioConfig {
    ScenarioModel model;
    // Test mode: every noise Z^i is identically zero.
    bool noise_free = false;
};

inline const char* scenario_name(const ScenarioModel& m) {
    static constexpr const char* names[] = {"gbm_correlated", "fractional_random_effect", "interacting_particles",
                                            "segmented_fbm"};
    return names[m.index()];
}

namespace detail {
template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

inline void require_nonzero_sigma(double sigma, const char* who) {
    require(std::isfinite(sigma) && sigma != 0.0, std::string(who) + ": sigma must be a nonzero real");
}
}  // namespace detail

inline void validate(const ScenarioConfig& cfg, std::size_t copies) {
    detail::require(copies >= 1, "scenario: need at least one copy");
    std::visit(detail::overloaded{
                   [&](const GbmCorrelated& g) {
                       detail::require_nonzero_sigma(g.sigma, "gbm_correlated");
                       detail::require(std::isfinite(g.s0), "gbm_correlated: S0 must be finite");
                       if (g.correlation.toeplitz_gamma && !g.correlation.explicit_matrix) {
                           const double gm = *g.correlation.toeplitz_gamma;
                           detail::require(gm >= 0.0 && gm < 1.0, "gbm_correlated: toeplitz gamma must lie in [0,1)");
                       }
                       (void)g.correlation.materialize(copies);
                   },
                   [&](const FractionalRandomEffect& f) {
                       detail::require_nonzero_sigma(f.sigma, "fractional_random_effect");
                       detail::require(f.hurst > 0.5 && f.hurst < 1.0,
                                       "fractional_random_effect: Hurst parameter must lie in (1/2,1)");
                       detail::require(std::isfinite(f.sigma_phi) && f.sigma_phi > 0.0,
                                       "fractional_random_effect: sigma_phi must be positive");
                   },
                   [&](const InteractingParticles& p) {
                       detail::require(std::isfinite(p.sigma), "interacting_particles: sigma must be finite");
                       detail::require(std::isfinite(p.y0), "interacting_particles: Y0 must be finite");
                       detail::require(p.drift(0.0) == 0.0, "interacting_particles: drift must vanish at t = 0");
                   },
                   [&](const SegmentedFbm& s) {
                       detail::require_nonzero_sigma(s.sigma, "segmented_fbm");
                       validate_hurst(s.hurst);
                       detail::require(s.delta >= 1, "segmented_fbm: delta must be a positive integer");
                       detail::require(s.b0(0.0) == 0.0, "segmented_fbm: b0 must vanish at t = 0");
                   },
               },
               cfg.model);
}

/// Closed-form truths on [0,T]: b0, its derivative and, where the scenario has one,
/// the drift of the underlying dynamics ("tt_b0", estimated by the back-transforms).
struct ScenarioTruth {
    std::function<double(double)> b0;
    std::function<double(double)> b0_prime;
    std::optional<std::function<double(double)>> drift;
};

inline ScenarioTruth truth(const ScenarioConfig& cfg, double horizon) {
    return std::visit(
        detail::overloaded{
            [](const GbmCorrelated& g) {
                const double half_var = 0.5 * g.sigma * g.sigma;
                Polynomial big = g.drift.antiderivative();
                Polynomial p = g.drift;
                return ScenarioTruth{[big, half_var](double t) { return big(t) - half_var * t; },
                                     [p, half_var](double t) { return p(t) - half_var; },
                                     std::function<double(double)>(p)};
            },
            [](const FractionalRandomEffect& f) {
                Polynomial p = f.drift;
                return ScenarioTruth{f.drift.antiderivative(), p, std::function<double(double)>(p)};
            },
            [](const InteractingParticles& ip) {
                // b0 = drift + int drift, so b0' = drift' + drift.
                Polynomial b0 = ip.drift + ip.drift.antiderivative();
                return ScenarioTruth{b0, b0.derivative(), std::function<double(double)>(ip.drift)};
            },
            [horizon](const SegmentedFbm& s) {
                Polynomial q = s.b0;
                Polynomial dq = s.b0.derivative();
                return ScenarioTruth{[q, horizon](double t) { return q(std::fmod(t, horizon)); },
                                     [dq, horizon](double t) { return dq(std::fmod(t, horizon)); }, std::nullopt};
            },
        },
        cfg.model);
}

// --- individual generators -------------------------------------------------

struct GbmCopies {
    PathEnsemble x;  // log-scale copies b0 + sigma W^i
    PathEnsemble s;  // S0 exp(X^i)
};

namespace detail {

inline SampledPath gbm_b0_on_grid(const GbmCorrelated& cfg, const TimeGrid& grid) {
    const double half_var = 0.5 * cfg.sigma * cfg.sigma;
    const Polynomial p = cfg.drift;
    return cumulative_integral(SampledPath::from_function(grid, [&](double t) { return p(t) - half_var; }));
}

inline PathEnsemble shift_ensemble(const PathEnsemble& noise, const SampledPath& b0) {
    std::vector<SampledPath> out;
    out.reserve(noise.count());
    for (const auto& z : noise) out.push_back(b0 + z);
    return PathEnsemble(noise.grid(), std::move(out));
}

inline PathEnsemble replicate(const SampledPath& p, std::size_t n) {
    return PathEnsemble(p.grid(), std::vector<SampledPath>(n, p));
}

inline GbmCopies gbm_from_x(const GbmCorrelated& cfg, PathEnsemble x) {
    std::vector<SampledPath> s;
    s.reserve(x.count());
    for (const auto& xi : x) {
        SampledPath si(x.grid());
        for (std::size_t l = 0; l < xi.size(); ++l) si[l] = cfg.s0 * std::exp(xi[l]);
        s.push_back(std::move(si));
    }
    PathEnsemble se(x.grid(), std::move(s));
    return GbmCopies{std::move(x), std::move(se)};
}

}  // namespace detail

inline GbmCopies simulate_gbm_copies(const GbmCorrelated& cfg, const TimeGrid& grid, std::size_t copies,
                                     RngStream& rng) {
    validate(ScenarioConfig{cfg}, copies);
    const SampledPath b0 = detail::gbm_b0_on_grid(cfg, grid);
    const PathEnsemble w = correlated_bm_ensemble(grid, cfg.correlation.materialize(copies), cfg.sigma, rng);
    return detail::gbm_from_x(cfg, detail::shift_ensemble(w, b0));
}

inline PathEnsemble simulate_fractional_copies(const FractionalRandomEffect& cfg, const TimeGrid& grid,
                                               std::size_t copies, RngStream& rng) {
    validate(ScenarioConfig{cfg}, copies);
    const SampledPath b0 = cumulative_integral(SampledPath::from_function(grid, cfg.drift));
    return detail::shift_ensemble(
        random_effect_fbm_ensemble(cfg.hurst, cfg.sigma, cfg.sigma_phi, grid, copies, rng), b0);
}

/// Explicit Euler scheme on the observation grid, coupled through the
/// empirical mean at each step. With sigma = 0 no random numbers are drawn.
inline PathEnsemble simulate_ips(const InteractingParticles& cfg, const TimeGrid& grid, std::size_t copies,
                                 RngStream& rng) {
    validate(ScenarioConfig{cfg}, copies);
    const Polynomial dd = cfg.drift.derivative();
    const double h = grid.step();
    const double sh = cfg.sigma * std::sqrt(h);
    std::vector<std::vector<double>> y(copies, std::vector<double>(grid.size(), cfg.y0));
    for (std::size_t l = 0; l < grid.subintervals(); ++l) {
        double mean = 0.0;
        for (const auto& yi : y) mean += yi[l];
        mean /= static_cast<double>(copies);
        const double force = dd(grid.point(l));
        for (auto& yi : y) {
            const double dw = cfg.sigma != 0.0 ? sh * rng.normal() : 0.0;
            yi[l + 1] = yi[l] + h * (force - (yi[l] - mean)) + dw;
        }
    }
    std::vector<SampledPath> paths;
    paths.reserve(copies);
    for (auto& v : y) paths.emplace_back(grid, std::move(v));
    return PathEnsemble(grid, std::move(paths));
}

// X^i_t = Y^i_t + int_0^t Y^i_s ds - Y0 (1 + t), integral by trapezoid.
inline PathEnsemble ips_transform(const PathEnsemble& y, double y0) {
    const TimeGrid& grid = y.grid();
    std::vector<SampledPath> out;
    out.reserve(y.count());
    for (std::size_t i = 0; i < y.count(); ++i) {
        const SampledPath& yi = y[i];
        if (std::abs(yi[0] - y0) > 1e-12 * std::max(1.0, std::abs(y0)))
            throw ValidationError("ips_transform: path " + std::to_string(i) + " starts at " + std::to_string(yi[0]) +
                                  " instead of Y0 = " + std::to_string(y0));
        const SampledPath integral = cumulative_integral(yi);
        SampledPath xi(grid);
        for (std::size_t l = 0; l < grid.size(); ++l) xi[l] = yi[l] + integral[l] - y0 * (1.0 + grid.point(l));
        xi[0] = 0.0;
        out.push_back(std::move(xi));
    }
    return PathEnsemble(grid, std::move(out));
}

/**
 * Cuts N copies on [0,T] out of one long path:
 * X^i(l T/n) = X(t_i + l T/n) - X(t_i), t_i = (i-1)(1+delta) T.
 *
 * The long grid step must divide T (n = T/step points per period) and the
 * long path must reach t_N + T.
 */
inline PathEnsemble segment_long_path(const SampledPath& long_path, double horizon, int delta, std::size_t copies) {
    detail::require(horizon > 0.0, "segment_long_path: horizon must be positive");
    detail::require(delta >= 0, "segment_long_path: delta must be nonnegative");
    detail::require(copies >= 1, "segment_long_path: need at least one copy");
    const double h = long_path.grid().step();
    const double ratio = horizon / h;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
        throw AlignmentError("segment_long_path: long-path step " + std::to_string(h) + " does not divide T = " +
                             std::to_string(horizon) + "; the long grid must have n points per period and n(1+delta) per window stride");
    const std::size_t stride = n * static_cast<std::size_t>(1 + delta);
    const std::size_t needed = (copies - 1) * stride + n;
    if (long_path.grid().subintervals() < needed)
        throw AlignmentError("segment_long_path: long path has " + std::to_string(long_path.grid().subintervals()) +
                             " subintervals, need at least (N-1) n(1+delta) + n = " + std::to_string(needed));
    const TimeGrid grid(horizon, n);
    std::vector<SampledPath> out;
    out.reserve(copies);
    for (std::size_t i = 0; i < copies; ++i) {
        const std::size_t start = i * stride;
        SampledPath xi(grid);
        for (std::size_t l = 0; l <= n; ++l) xi[l] = long_path[start + l] - long_path[start];
        out.push_back(std::move(xi));
    }
    return PathEnsemble(grid, std::move(out));
}

// Grid of the single long observation behind a SegmentedFbm ensemble: [0, N(T+Delta)], n points per T.
inline TimeGrid segmented_long_grid(const SegmentedFbm& cfg, const TimeGrid& grid, std::size_t copies) {
    const std::size_t periods = copies * static_cast<std::size_t>(1 + cfg.delta);
    return TimeGrid(grid.horizon() * static_cast<double>(periods), grid.subintervals() * periods);
}

namespace detail {

// Periodic b0 on the long grid, evaluated by index so period boundaries are exact.
inline SampledPath periodic_b0(const SegmentedFbm& cfg, const TimeGrid& long_grid, std::size_t n, double horizon) {
    SampledPath out(long_grid);
    for (std::size_t k = 0; k < long_grid.size(); ++k)
        out[k] = cfg.b0(horizon * static_cast<double>(k % n) / static_cast<double>(n));
    return out;
}

}  // namespace detail

/**
 * Prepared simulator for one (scenario, grid, N) triple.
 *
 * Heavy set-up (correlation square root, fBm factorization) happens once in
 * the constructor; simulate() is const and safe to call concurrently with
 * distinct streams.
 */
class ScenarioSimulator {
public:
    struct Output {
        PathEnsemble x;                  // copies X^i = b0 + Z^i fed to the estimators
        std::optional<PathEnsemble> raw;  // S^i (GBM) or Y^i (IPS) before the transform
    };

    ScenarioSimulator(ScenarioConfig cfg, TimeGrid grid, std::size_t copies)
        : cfg_(std::move(cfg)), grid_(grid), copies_(copies) {
        validate(cfg_, copies_);
        std::visit(detail::overloaded{
                       [&](const GbmCorrelated& g) {
                           b0_ = detail::gbm_b0_on_grid(g, grid_);
                           if (!cfg_.noise_free) root_ = matrix_sqrt(g.correlation.materialize(copies_));
                       },
                       [&](const FractionalRandomEffect& f) {
                           b0_ = cumulative_integral(SampledPath::from_function(grid_, f.drift));
                           if (!cfg_.noise_free) fbm_.emplace(FbmParams{f.hurst, f.sigma}, grid_);
                       },
                       [&](const InteractingParticles&) {},
                       [&](const SegmentedFbm& s) {
                           const TimeGrid lg = segmented_long_grid(s, grid_, copies_);
                           long_b0_ = detail::periodic_b0(s, lg, grid_.subintervals(), grid_.horizon());
                           if (!cfg_.noise_free) fbm_.emplace(FbmParams{s.hurst, s.sigma}, lg);
                       },
                   },
                   cfg_.model);
    }

    const ScenarioConfig& config() const noexcept { return cfg_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t copies() const noexcept { return copies_; }
    const FbmSampler* fbm_sampler() const noexcept { return fbm_ ? &*fbm_ : nullptr; }

    Output simulate(RngStream& rng) const {
        return std::visit(
            detail::overloaded{
                [&](const GbmCorrelated& g) -> Output {
                    PathEnsemble x = cfg_.noise_free
                                         ? detail::replicate(*b0_, copies_)
                                         : detail::shift_ensemble(correlated_bm_from_root(grid_, root_, g.sigma, rng), *b0_);
                    GbmCopies c = detail::gbm_from_x(g, std::move(x));
                    return Output{std::move(c.x), std::move(c.s)};
                },
                [&](const FractionalRandomEffect& f) -> Output {
                    if (cfg_.noise_free) return Output{detail::replicate(*b0_, copies_), std::nullopt};
                    return Output{detail::shift_ensemble(random_effect_from_sampler(*fbm_, f.sigma_phi, copies_, rng), *b0_),
                                  std::nullopt};
                },
                [&](const InteractingParticles& p) -> Output {
                    InteractingParticles q = p;
                    if (cfg_.noise_free) q.sigma = 0.0;
                    PathEnsemble y = simulate_ips(q, grid_, copies_, rng);
                    PathEnsemble x = ips_transform(y, p.y0);
                    return Output{std::move(x), std::move(y)};
                },
                [&](const SegmentedFbm& s) -> Output {
                    SampledPath long_path = *long_b0_;
                    if (!cfg_.noise_free) long_path += fbm_->sample_paths(1, rng).front();
                    return Output{segment_long_path(long_path, grid_.horizon(), s.delta, copies_), std::nullopt};
                },
            },
            cfg_.model);
    }

private:
    ScenarioConfig cfg_;
    TimeGrid grid_;
    std::size_t copies_;
    std::optional<SampledPath> b0_;
    std::optional<SampledPath> long_b0_;
    Eigen::MatrixXd root_;
    std::optional<FbmSampler> fbm_;
};

inline PathEnsemble simulate_segmented(const SegmentedFbm& cfg, const TimeGrid& grid, std::size_t copies,
                                       RngStream& rng) {
    return ScenarioSimulator(ScenarioConfig{cfg}, grid, copies).simulate(rng).x;
}

// --- integrated-covariance bounds --------------------------------------------

/// Nonnegative symmetric matrix bounding |int_0^T E(Z^i_s Z^k_s) ds|.
class GammaBound {
public:
    explicit GammaBound(Eigen::MatrixXd m) : m_(std::move(m)) {
        detail::require(m_.rows() == m_.cols() && m_.rows() >= 1, "GammaBound: must be square and nonempty");
        for (Eigen::Index i = 0; i < m_.rows(); ++i)
            for (Eigen::Index k = 0; k < m_.cols(); ++k) {
                detail::require(m_(i, k) >= 0.0, "GammaBound: entries must be nonnegative");
                detail::require(m_(i, k) == m_(k, i), "GammaBound: must be symmetric");
            }
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    double operator()(std::size_t i, std::size_t k) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }

private:
    Eigen::MatrixXd m_;
};

/**
 * Scenario-specific Gamma from the closed-form covariance bounds:
 *  - GBM:            (sigma T)^2 |R^{i,k}|
 *  - random effect:  T (sigma_phi^2 T^2 + sigma^2 T^{2H}) on the diagonal
 *  - particles:      T (1 v T)^3 sigma^2 (1_{i=k} + 3/N)
 *  - segmented fBm:  sigma^2 [T^{2H+1} 1_{i=k} + 4H|2H-1| T^3 |k-i|^{2H-2} Delta^{2H-2} 1_{i!=k}],
 *                    valid only for Delta >= T.
 */
inline GammaBound gamma_matrix(const ScenarioConfig& cfg, double horizon, std::size_t copies) {
    detail::require(horizon > 0.0, "gamma_matrix: horizon must be positive");
    detail::require(copies >= 1, "gamma_matrix: need at least one copy");
    const auto N = static_cast<Eigen::Index>(copies);
    const double T = horizon;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(N, N);
    std::visit(detail::overloaded{
                   [&](const GbmCorrelated& c) {
                       const CorrelationMatrix r = c.correlation.materialize(copies);
                       const double s = (c.sigma * T) * (c.sigma * T);
                       for (Eigen::Index i = 0; i < N; ++i)
                           for (Eigen::Index k = 0; k < N; ++k) g(i, k) = s * std::abs(r.matrix()(i, k));
                   },
                   [&](const FractionalRandomEffect& f) {
                       const double big_sigma2 =
                           T * (f.sigma_phi * f.sigma_phi * T * T + f.sigma * f.sigma * std::pow(T, 2.0 * f.hurst));
                       g.diagonal().setConstant(big_sigma2);
                   },
                   [&](const InteractingParticles& p) {
                       const double scale = T * std::pow(std::max(1.0, T), 3) * p.sigma * p.sigma;
                       const double off = scale * 3.0 / static_cast<double>(copies);
                       g.setConstant(off);
                       g.diagonal().array() += scale;
                   },
                   [&](const SegmentedFbm& s) {
                       const double big_delta = static_cast<double>(s.delta) * T;
                       if (big_delta < T)
                           throw ValidationError("gamma_matrix: the segmented-fBm bound requires a forgetting period "
                                                 "Delta = delta*T >= T (delta >= 1)");
                       const double H = s.hurst;
                       const double s2 = s.sigma * s.sigma;
                       const double c1 = std::pow(T, 2.0 * H + 1.0);
                       const double c2 = 4.0 * H * std::abs(2.0 * H - 1.0) * T * T * T;
                       for (Eigen::Index i = 0; i < N; ++i)
                           for (Eigen::Index k = 0; k < N; ++k) {
                               if (i == k) {
                                   g(i, k) = s2 * c1;
                               } else {
                                   const double lag = static_cast<double>(std::abs(k - i));
                                   g(i, k) = s2 * c2 * std::pow(lag, 2.0 * H - 2.0) * std::pow(big_delta, 2.0 * H - 2.0);
                               }
                           }
                   },
               },
               cfg.model);
    return GammaBound(std::move(g));
}

// R_N = (1/N^2) sum_{i,k} Gamma^{i,k}.
inline double risk_rate(const GammaBound& gamma) {
    const double n = static_cast<double>(gamma.size());
    return gamma.matrix().sum() / (n * n);
}

}  // namespace driftlab
