#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/errors.hpp"

namespace driftlab {

/**
 * Uniform dissection {l*T/n ; l = 0..n} of [0, T].
 *
 * A value type: two grids are the same grid iff horizon and subinterval
 * count compare equal.
 */
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t subintervals)
        : horizon_(horizon), subintervals_(subintervals) {
        detail::require(std::isfinite(horizon) && horizon > 0.0, "TimeGrid: horizon must be positive");
        detail::require(subintervals >= 1, "TimeGrid: need at least one subinterval");
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t subintervals() const noexcept { return subintervals_; }
    std::size_t size() const noexcept { return subintervals_ + 1; }
    double step() const noexcept { return horizon_ / static_cast<double>(subintervals_); }

    // t_l = l*T/n, with the last point pinned to T exactly.
    double point(std::size_t l) const noexcept {
        if (l == subintervals_) return horizon_;
        return horizon_ * static_cast<double>(l) / static_cast<double>(subintervals_);
    }

    std::vector<double> points() const {
        std::vector<double> out(size());
        for (std::size_t l = 0; l < out.size(); ++l) out[l] = point(l);
        return out;
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double horizon_;
    std::size_t subintervals_;
};

// Values of one trajectory on a TimeGrid.
class SampledPath {
public:
    explicit SampledPath(TimeGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

    SampledPath(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        detail::require(values_.size() == grid_.size(),
                        "SampledPath: expected " + std::to_string(grid_.size()) + " values, got " +
                            std::to_string(values_.size()));
    }

    // Samples f at every grid point.
    static SampledPath from_function(TimeGrid grid, const std::function<double(double)>& f) {
        std::vector<double> v(grid.size());
        for (std::size_t l = 0; l < v.size(); ++l) v[l] = f(grid.point(l));
        return SampledPath(grid, std::move(v));
    }

    static SampledPath constant(TimeGrid grid, double c) {
        return SampledPath(grid, std::vector<double>(grid.size(), c));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t l) const noexcept { return values_[l]; }
    double& operator[](std::size_t l) noexcept { return values_[l]; }
    double front() const noexcept { return values_.front(); }
    double back() const noexcept { return values_.back(); }

    SampledPath& operator+=(const SampledPath& o);
    SampledPath& operator-=(const SampledPath& o);
    SampledPath& operator*=(double c) noexcept {
        for (double& v : values_) v *= c;
        return *this;
    }

    friend SampledPath operator+(SampledPath a, const SampledPath& b) { return a += b; }
    friend SampledPath operator-(SampledPath a, const SampledPath& b) { return a -= b; }
    friend SampledPath operator*(double c, SampledPath a) { return a *= c; }

    friend bool operator==(const SampledPath&, const SampledPath&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

// N >= 1 trajectories sharing one grid.
class PathEnsemble {
public:
    PathEnsemble(TimeGrid grid, std::vector<SampledPath> paths) : grid_(grid), paths_(std::move(paths)) {
        detail::require(!paths_.empty(), "PathEnsemble: need at least one path");
        for (const auto& p : paths_) {
            if (!(p.grid() == grid_)) throw GridMismatchError("PathEnsemble: path grid differs from ensemble grid");
        }
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t count() const noexcept { return paths_.size(); }
    const SampledPath& operator[](std::size_t i) const noexcept { return paths_[i]; }
    const std::vector<SampledPath>& paths() const noexcept { return paths_; }

    auto begin() const noexcept { return paths_.begin(); }
    auto end() const noexcept { return paths_.end(); }

private:
    TimeGrid grid_;
    std::vector<SampledPath> paths_;
};

namespace detail {

inline void require_same_grid(const SampledPath& a, const SampledPath& b, const char* op) {
    if (!(a.grid() == b.grid())) throw GridMismatchError(std::string(op) + ": paths live on different grids");
}

}  // namespace detail

inline SampledPath& SampledPath::operator+=(const SampledPath& o) {
    detail::require_same_grid(*this, o, "operator+");
    for (std::size_t l = 0; l < values_.size(); ++l) values_[l] += o.values_[l];
    return *this;
}

inline SampledPath& SampledPath::operator-=(const SampledPath& o) {
    detail::require_same_grid(*this, o, "operator-");
    for (std::size_t l = 0; l < values_.size(); ++l) values_[l] -= o.values_[l];
    return *this;
}

// Trapezoid approximation of the L2([0,T]) inner product.
inline double l2_inner(const SampledPath& f, const SampledPath& g) {
    detail::require_same_grid(f, g, "l2_inner");
    const std::size_t n = f.grid().subintervals();
    double acc = 0.5 * (f[0] * g[0] + f[n] * g[n]);
    for (std::size_t l = 1; l < n; ++l) acc += f[l] * g[l];
    return acc * f.grid().step();
}

inline double l2_norm_sq(const SampledPath& f) { return l2_inner(f, f); }

// t_l -> trapezoid integral of f over [0, t_l]; zero at t_0.
inline SampledPath cumulative_integral(const SampledPath& f) {
    SampledPath out(f.grid());
    const double h = f.grid().step();
    for (std::size_t l = 1; l < f.size(); ++l) out[l] = out[l - 1] + 0.5 * h * (f[l - 1] + f[l]);
    return out;
}

/// Left-point Riemann-Stieltjes sum of phi against X:
/// sum_{l<n} phi(t_l) (X(t_{l+1}) - X(t_l)).
/// This is the canonical evaluation of the Young integral on grid data.
inline double riemann_stieltjes(const SampledPath& phi, const SampledPath& x) {
    detail::require_same_grid(phi, x, "riemann_stieltjes");
    double acc = 0.0;
    for (std::size_t l = 0; l + 1 < x.size(); ++l) acc += phi[l] * (x[l + 1] - x[l]);
    return acc;
}

/// Same integral through integration by parts:
/// phi(T) X(T) - phi(0) X(0) - <phi', X>.
/// Used as an independent cross-check of riemann_stieltjes.
inline double rs_by_parts(const SampledPath& phi, const SampledPath& dphi, const SampledPath& x) {
    detail::require_same_grid(phi, x, "rs_by_parts");
    detail::require_same_grid(dphi, x, "rs_by_parts");
    return phi.back() * x.back() - phi.front() * x.front() - l2_inner(dphi, x);
}

// Pointwise arithmetic mean across the ensemble.
inline SampledPath mean_path(const PathEnsemble& ensemble) {
    SampledPath out(ensemble.grid());
    for (const auto& p : ensemble) out += p;
    out *= 1.0 / static_cast<double>(ensemble.count());
    return out;
}

}  // namespace driftlab
