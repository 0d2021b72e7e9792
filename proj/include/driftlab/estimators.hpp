#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/basis.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/grid.hpp"

namespace driftlab {

enum class EstimateKind { mean_path, projection, gbm_drift, ips_drift };

// An estimated function sampled on the simulation grid, plus how it was produced.
struct EstimateFn {
    SampledPath values;
    EstimateKind kind = EstimateKind::mean_path;
    std::vector<double> coefficients;  // projection estimates: a_1..a_m
    std::size_t dimension = 0;         // projection estimates: m
};

/**
 * Young-integral coefficients a_j = I(phi_j, mean path), j = 1..M.
 *
 * Computed once for the largest model; every b'_m with m <= M is a
 * truncation, so the vector is prefix-stable in M.
 */
struct CoefficientVector {
    std::vector<double> values;
    TrigBasis basis;
    TimeGrid grid;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t j1) const { return values.at(j1 - 1); }  // 1-based
};

inline EstimateFn estimate_b(const PathEnsemble& ensemble) {
    return EstimateFn{mean_path(ensemble), EstimateKind::mean_path, {}, 0};
}

inline CoefficientVector compute_coefficients(const SampledPath& mean, const TrigBasis& basis, std::size_t max_dim) {
    const TimeGrid& grid = mean.grid();
    detail::require(max_dim >= 1, "compute_coefficients: M must be >= 1");
    detail::require(max_dim <= basis.max_dim(), "compute_coefficients: M exceeds the basis dimension");
    if (2 * max_dim >= grid.subintervals())
        throw AliasingError("compute_coefficients: M = " + std::to_string(max_dim) + " needs M < n/2 but n = " +
                            std::to_string(grid.subintervals()));
    std::vector<double> a(max_dim);
    for (std::size_t j = 1; j <= max_dim; ++j) a[j - 1] = riemann_stieltjes(basis.sample(j, grid), mean);
    return CoefficientVector{std::move(a), basis, grid};
}

inline CoefficientVector compute_coefficients(const PathEnsemble& ensemble, const TrigBasis& basis,
                                              std::size_t max_dim) {
    return compute_coefficients(mean_path(ensemble), basis, max_dim);
}

// b'_m = sum_{j<=m} a_j phi_j on the coefficient grid.
inline EstimateFn derivative_estimate(const CoefficientVector& coeffs, std::size_t m) {
    if (m < 1 || m > coeffs.size())
        throw ValidationError("derivative_estimate: m = " + std::to_string(m) + " outside 1.." +
                              std::to_string(coeffs.size()));
    SampledPath out(coeffs.grid);
    for (std::size_t j = 1; j <= m; ++j) {
        const double a = coeffs[j];
        for (std::size_t l = 0; l < out.size(); ++l) out[l] += a * coeffs.basis.value(j, coeffs.grid.point(l));
    }
    return EstimateFn{std::move(out), EstimateKind::projection,
                      std::vector<double>(coeffs.values.begin(), coeffs.values.begin() + static_cast<std::ptrdiff_t>(m)), m};
}

// GBM drift estimate sigma^2/2 + b'.
inline EstimateFn gbm_drift_estimate(const EstimateFn& bprime, double sigma) {
    EstimateFn out = bprime;
    const double shift = 0.5 * sigma * sigma;
    for (double& v : out.values.values()) v += shift;
    out.kind = EstimateKind::gbm_drift;
    return out;
}

/// Particle-system drift estimate b(t) - int_0^t e^{-(t-s)} b(s) ds.
/// The convolution is a trapezoid sum over grid points 0..l for each t_l.
inline EstimateFn ips_backtransform(const EstimateFn& bhat) {
    const SampledPath& b = bhat.values;
    const TimeGrid& grid = b.grid();
    const double h = grid.step();
    SampledPath out(grid);
    for (std::size_t l = 0; l < grid.size(); ++l) {
        const double t = grid.point(l);
        double conv = 0.0;
        if (l > 0) {
            conv = 0.5 * (std::exp(-t) * b[0] + b[l]);
            for (std::size_t k = 1; k < l; ++k) conv += std::exp(-(t - grid.point(k))) * b[k];
            conv *= h;
        }
        out[l] = b[l] - conv;
    }
    return EstimateFn{std::move(out), EstimateKind::ips_drift, {}, 0};
}

// Integrated squared error ||estimate - truth||^2 by trapezoid on the estimate's grid.
inline double mise(const SampledPath& estimate, const SampledPath& truth) {
    return l2_norm_sq(estimate - truth);
}

inline double mise(const EstimateFn& estimate, const std::function<double(double)>& truth) {
    return mise(estimate.values, SampledPath::from_function(estimate.values.grid(), truth));
}

}  // namespace driftlab
