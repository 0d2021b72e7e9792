#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "driftlab/errors.hpp"
#include "driftlab/grid.hpp"

namespace driftlab {

/**
 * [0,T]-supported trigonometric orthonormal family, 1-based:
 *   phi_1      = T^{-1/2}
 *   phi_{2j}   = sqrt(2/T) cos(2 pi j t / T)
 *   phi_{2j+1} = sqrt(2/T) sin(2 pi j t / T)
 */
class TrigBasis {
public:
    TrigBasis(double horizon, std::size_t max_dim) : horizon_(horizon), max_dim_(max_dim) {
        detail::require(std::isfinite(horizon) && horizon > 0.0, "TrigBasis: horizon must be positive");
        detail::require(max_dim >= 1, "TrigBasis: dimension must be >= 1");
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t max_dim() const noexcept { return max_dim_; }

    double value(std::size_t j, double t) const {
        check(j, t);
        if (j == 1) return 1.0 / std::sqrt(horizon_);
        const double w = omega(j);
        const double a = std::sqrt(2.0 / horizon_);
        return j % 2 == 0 ? a * std::cos(w * t) : a * std::sin(w * t);
    }

    double derivative(std::size_t j, double t) const {
        check(j, t);
        if (j == 1) return 0.0;
        const double w = omega(j);
        const double a = std::sqrt(2.0 / horizon_);
        return j % 2 == 0 ? -a * w * std::sin(w * t) : a * w * std::cos(w * t);
    }

    SampledPath sample(std::size_t j, const TimeGrid& grid) const {
        require_grid(grid);
        SampledPath out(grid);
        for (std::size_t l = 0; l < grid.size(); ++l) out[l] = value(j, grid.point(l));
        return out;
    }

    SampledPath sample_derivative(std::size_t j, const TimeGrid& grid) const {
        require_grid(grid);
        SampledPath out(grid);
        for (std::size_t l = 0; l < grid.size(); ++l) out[l] = derivative(j, grid.point(l));
        return out;
    }

private:
    // 2 pi j' / T with j' = floor(j/2).
    double omega(std::size_t j) const noexcept {
        return 2.0 * std::numbers::pi * static_cast<double>(j / 2) / horizon_;
    }

    void check(std::size_t j, double t) const {
        if (j < 1 || j > max_dim_)
            throw ValidationError("TrigBasis: index " + std::to_string(j) + " outside 1.." + std::to_string(max_dim_));
        if (!(t >= 0.0 && t <= horizon_))
            throw ValidationError("TrigBasis: time " + std::to_string(t) + " outside [0, T]");
    }

    void require_grid(const TimeGrid& grid) const {
        if (grid.horizon() != horizon_) throw GridMismatchError("TrigBasis: grid horizon differs from basis horizon");
    }

    double horizon_;
    std::size_t max_dim_;
};

inline double eval_basis(const TrigBasis& b, std::size_t j, double t) { return b.value(j, t); }
inline double eval_basis_derivative(const TrigBasis& b, std::size_t j, double t) { return b.derivative(j, t); }

// sum_{j<=m} ||phi_j||_inf^2 = (2m - 1)/T.
inline double complexity_L(std::size_t m, double horizon) {
    detail::require(m >= 1, "complexity_L: m must be >= 1");
    detail::require(horizon > 0.0, "complexity_L: horizon must be positive");
    return (2.0 * static_cast<double>(m) - 1.0) / horizon;
}

// sum_{j<=m} ||phi_j'||_inf^2 = sum_{2<=i<=m} (2/T)(2 pi floor(i/2) / T)^2.
inline double complexity_Lbar(std::size_t m, double horizon) {
    detail::require(m >= 1, "complexity_Lbar: m must be >= 1");
    detail::require(horizon > 0.0, "complexity_Lbar: horizon must be positive");
    double acc = 0.0;
    for (std::size_t i = 2; i <= m; ++i) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(i / 2) / horizon;
        acc += 2.0 / horizon * w * w;
    }
    return acc;
}

}  // namespace driftlab
