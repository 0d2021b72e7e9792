#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "driftlab/grid.hpp"
#include "driftlab/noise.hpp"
#include "driftlab/rng.hpp"

using namespace driftlab;

namespace {

constexpr double kPi = std::numbers::pi;

SampledPath fn(const TimeGrid& g, double (*f)(double)) { return SampledPath::from_function(g, f); }

}  // namespace

TEST(TimeGrid, PointsAreUniformAndPinned) {
    const TimeGrid g(2.5, 7);
    EXPECT_EQ(g.size(), 8u);
    EXPECT_DOUBLE_EQ(g.step(), 2.5 / 7);
    EXPECT_EQ(g.point(0), 0.0);
    EXPECT_EQ(g.point(7), 2.5);
    for (std::size_t l = 1; l < g.size(); ++l) EXPECT_GT(g.point(l), g.point(l - 1));
}

TEST(TimeGrid, RejectsBadParameters) {
    EXPECT_THROW(TimeGrid(0.0, 10), ValidationError);
    EXPECT_THROW(TimeGrid(-1.0, 10), ValidationError);
    EXPECT_THROW(TimeGrid(1.0, 0), ValidationError);
}

TEST(SampledPath, LengthMustMatchGrid) {
    EXPECT_THROW(SampledPath(TimeGrid(1.0, 4), std::vector<double>(4)), ValidationError);
}

TEST(PathEnsemble, RequiresPathsOnOneGrid) {
    const TimeGrid a(1.0, 4), b(1.0, 5);
    EXPECT_THROW(PathEnsemble(a, {}), ValidationError);
    EXPECT_THROW(PathEnsemble(a, {SampledPath(a), SampledPath(b)}), GridMismatchError);
}

TEST(L2Inner, Examples) {
    const TimeGrid g10(1.0, 10);
    EXPECT_DOUBLE_EQ(l2_inner(SampledPath::constant(g10, 1.0), SampledPath::constant(g10, 1.0)), 1.0);
    for (std::size_t n : {1u, 3u, 10u, 77u}) {
        const TimeGrid g(1.0, n);
        EXPECT_NEAR(l2_inner(fn(g, [](double t) { return t; }), SampledPath::constant(g, 1.0)), 0.5, 1e-15);
    }
    const TimeGrid g100(1.0, 100);
    EXPECT_NEAR(l2_inner(fn(g100, [](double t) { return t * t; }), SampledPath::constant(g100, 1.0)), 1.0 / 3.0, 2e-5);
}

TEST(L2Inner, MismatchedGridsThrow) {
    EXPECT_THROW(l2_inner(SampledPath(TimeGrid(1.0, 4)), SampledPath(TimeGrid(1.0, 5))), GridMismatchError);
    EXPECT_THROW(l2_inner(SampledPath(TimeGrid(1.0, 4)), SampledPath(TimeGrid(2.0, 4))), GridMismatchError);
}

TEST(L2NormSq, Examples) {
    const TimeGrid g(3.0, 20);
    EXPECT_EQ(l2_norm_sq(SampledPath(g)), 0.0);
    EXPECT_NEAR(l2_norm_sq(SampledPath::constant(g, -1.5)), 2.25 * 3.0, 1e-13);
    const TimeGrid g100(1.0, 100);
    EXPECT_NEAR(l2_norm_sq(fn(g100, [](double t) { return 2 * t; })), 4.0 / 3.0, 1e-4);
}

TEST(CumulativeIntegral, Examples) {
    const TimeGrid g(1.0, 100);
    const SampledPath ones = cumulative_integral(SampledPath::constant(g, 1.0));
    for (std::size_t l = 0; l < g.size(); ++l) EXPECT_NEAR(ones[l], g.point(l), 1e-14);
    EXPECT_EQ(cumulative_integral(SampledPath(g)), SampledPath(g));
    const SampledPath lin = cumulative_integral(fn(g, [](double t) { return t; }));
    EXPECT_EQ(lin.front(), 0.0);
    EXPECT_NEAR(lin.back(), 0.5, 1e-15);
}

TEST(CumulativeIntegral, MonotoneForNonnegativeIntegrand) {
    const TimeGrid g(2.0, 64);
    const SampledPath c = cumulative_integral(fn(g, [](double t) { return std::sin(5 * t) * std::sin(5 * t); }));
    for (std::size_t l = 1; l < g.size(); ++l) EXPECT_GE(c[l], c[l - 1]);
}

TEST(RiemannStieltjes, Examples) {
    const TimeGrid g(1.0, 40);
    RngStream rng(3, 0);
    std::vector<double> v(g.size());
    for (double& x : v) x = rng.normal();
    const SampledPath x(g, v);
    EXPECT_NEAR(riemann_stieltjes(SampledPath::constant(g, 1.0), x), x.back() - x.front(), 1e-13);
    EXPECT_EQ(riemann_stieltjes(fn(g, [](double t) { return std::cos(t); }), SampledPath::constant(g, 4.2)), 0.0);
    for (std::size_t n : {1u, 2u, 10u, 333u}) {
        const TimeGrid gn(1.0, n);
        // Left sum of t dt: sum_{l<n} (l/n)(1/n) = (n-1)/(2n).
        const double expect = (static_cast<double>(n) - 1.0) / (2.0 * static_cast<double>(n));
        EXPECT_NEAR(riemann_stieltjes(fn(gn, [](double t) { return t; }), fn(gn, [](double t) { return t; })), expect,
                    1e-14);
    }
}

TEST(RiemannStieltjes, MismatchedGridsThrow) {
    EXPECT_THROW(riemann_stieltjes(SampledPath(TimeGrid(1.0, 4)), SampledPath(TimeGrid(1.0, 8))), GridMismatchError);
}

TEST(RsByParts, Examples) {
    const TimeGrid g(1.0, 50);
    const SampledPath x = fn(g, [](double t) { return std::exp(t) - t * t; });
    EXPECT_NEAR(rs_by_parts(SampledPath::constant(g, 1.0), SampledPath(g), x), x.back() - x.front(), 1e-15);

    const SampledPath phi = fn(g, [](double t) { return std::sin(3 * t); });
    const SampledPath dphi = fn(g, [](double t) { return 3 * std::cos(3 * t); });
    // With X = c the by-parts form reduces to c(phi(T) - phi(0) - int phi'), zero up to quadrature.
    EXPECT_NEAR(rs_by_parts(phi, dphi, SampledPath::constant(g, 2.0)), 0.0, 2e-3);

    const TimeGrid g200(1.0, 200);
    const SampledPath s = fn(g200, [](double t) { return std::sin(2 * kPi * t); });
    const SampledPath ds = fn(g200, [](double t) { return 2 * kPi * std::cos(2 * kPi * t); });
    const SampledPath id = fn(g200, [](double t) { return t; });
    const double ibp = rs_by_parts(s, ds, id);
    EXPECT_NEAR(ibp, 0.0, 1e-3);
    EXPECT_LE(std::abs(ibp - riemann_stieltjes(s, id)), 1e-2);
}

TEST(MeanPath, Examples) {
    const TimeGrid g(1.0, 10);
    const SampledPath p = fn(g, [](double t) { return std::cos(7 * t); });
    const SampledPath same = mean_path(PathEnsemble(g, {p, p, p}));
    for (std::size_t l = 0; l < g.size(); ++l) EXPECT_NEAR(same[l], p[l], 1e-15);
    EXPECT_EQ(mean_path(PathEnsemble(g, {p, -1.0 * p})), SampledPath(g));
    const SampledPath m = mean_path(PathEnsemble(
        g, {SampledPath::constant(g, 0.0), SampledPath::constant(g, 1.0), SampledPath::constant(g, 2.0)}));
    for (std::size_t l = 0; l < g.size(); ++l) EXPECT_EQ(m[l], 1.0);
}

// --- properties --------------------------------------------------------------

TEST(RiemannStieltjesProperty, BilinearAndTelescoping) {
    RngStream rng(11, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const TimeGrid g(0.5 + trial * 0.1, 5 + static_cast<std::size_t>(trial));
        auto random_path = [&] {
            std::vector<double> v(g.size());
            for (double& x : v) x = rng.normal();
            return SampledPath(g, v);
        };
        const SampledPath phi = random_path(), psi = random_path(), x = random_path();
        const double a = rng.normal(), b = rng.normal();
        const double lhs = riemann_stieltjes(a * phi + b * psi, x);
        const double rhs = a * riemann_stieltjes(phi, x) + b * riemann_stieltjes(psi, x);
        EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
        EXPECT_NEAR(riemann_stieltjes(SampledPath::constant(g, 1.0), x), x.back() - x.front(), 1e-12);
    }
}

TEST(QuadratureProperty, TrapezoidErrorBound) {
    struct Case {
        double (*f)(double);
        double exact;
        double sup_f2;
    };
    const Case cases[] = {
        {[](double t) { return t * t; }, 1.0 / 3.0, 2.0},
        {[](double t) { return std::sin(2 * kPi * t); }, 0.0, 4 * kPi * kPi},
        {[](double t) { return std::sin(2 * kPi * t) + t * t; }, 1.0 / 3.0, 4 * kPi * kPi + 2.0},
    };
    for (const auto& c : cases)
        for (std::size_t n : {4u, 16u, 100u, 1000u}) {
            const TimeGrid g(1.0, n);
            const double q = l2_inner(fn(g, c.f), SampledPath::constant(g, 1.0));
            EXPECT_LE(std::abs(q - c.exact), c.sup_f2 / (12.0 * static_cast<double>(n * n)) + 1e-14);
        }
}

TEST(IbpProperty, GapShrinksWithGridRefinementOnFbm) {
    // Fine paths on 1024 steps; coarser grids are exact subsamples of the same paths.
    const TimeGrid fine(1.0, 1024);
    for (double hurst : {0.5, 0.75}) {
        RngStream rng(2024, static_cast<std::uint64_t>(hurst * 100));
        const PathEnsemble paths = sample_fbm_paths(FbmParams{hurst, 1.0}, fine, 100, rng);
        std::vector<double> mean_gap;
        for (std::size_t n : {256u, 512u, 1024u}) {
            const TimeGrid g(1.0, n);
            const std::size_t stride = 1024 / n;
            const SampledPath phi = fn(g, [](double t) { return std::cos(2 * kPi * t) + t; });
            const SampledPath dphi = fn(g, [](double t) { return -2 * kPi * std::sin(2 * kPi * t) + 1.0; });
            double acc = 0.0;
            for (const auto& p : paths) {
                std::vector<double> v(g.size());
                for (std::size_t l = 0; l < g.size(); ++l) v[l] = p[l * stride];
                const SampledPath x(g, v);
                acc += std::abs(riemann_stieltjes(phi, x) - rs_by_parts(phi, dphi, x));
            }
            mean_gap.push_back(acc / static_cast<double>(paths.count()));
        }
        EXPECT_GE(mean_gap[0] / mean_gap[1], 1.5) << "H = " << hurst;
        EXPECT_GE(mean_gap[1] / mean_gap[2], 1.5) << "H = " << hurst;
    }
}
