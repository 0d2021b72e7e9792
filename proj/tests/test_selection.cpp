#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "driftlab/montecarlo.hpp"
#include "driftlab/selection.hpp"
#include "stats.hpp"

using namespace driftlab;

namespace {

CoefficientVector coeffs(std::vector<double> a) {
    const TimeGrid g(1.0, 100);
    return CoefficientVector{std::move(a), TrigBasis(1.0, 40), g};
}

}  // namespace

TEST(ObjectiveGamma, Examples) {
    const CoefficientVector zero = coeffs(std::vector<double>(6, 0.0));
    for (std::size_t m = 1; m <= 6; ++m) EXPECT_EQ(objective_gamma(zero, m), 0.0);
    EXPECT_EQ(objective_gamma(coeffs({1.0, 2.0}), 2), -5.0);
    EXPECT_THROW(objective_gamma(coeffs({1.0, 2.0}), 3), ValidationError);
}

TEST(ObjectiveGamma, AgreesWithDirectContrastEvaluation) {
    // gamma_N(b'_m) = ||b'_m||^2 - 2 I(b'_m, mean path), both evaluated on the grid.
    const TimeGrid g(1.0, 150);
    const TrigBasis b(1.0, 12);
    RngStream rng(8, 8);
    std::vector<double> v(g.size());
    double acc = 0.0;
    for (std::size_t l = 0; l < g.size(); ++l) {
        v[l] = acc + g.point(l) * g.point(l);
        acc += 0.05 * rng.normal();
    }
    const SampledPath xbar(g, v);
    const CoefficientVector c = compute_coefficients(xbar, b, 12);
    for (std::size_t m = 1; m <= 12; ++m) {
        const SampledPath est = derivative_estimate(c, m).values;
        const double direct = l2_norm_sq(est) - 2.0 * riemann_stieltjes(est, xbar);
        const double closed = objective_gamma(c, m);
        EXPECT_NEAR(direct, closed, 1e-8 * std::abs(closed)) << "m = " << m;
    }
}

TEST(Penalty, Examples) {
    EXPECT_NEAR(penalty(3, 0.01, 2.0), 0.06, 1e-16);
    for (std::size_t m = 1; m < 5; ++m) EXPECT_EQ(penalty(m, 0.0, 3.0), 0.0);
    for (std::size_t m = 1; m < 5; ++m) EXPECT_NEAR(penalty(m, 4 * 0.25 / 100, 1.5), 1.5 * m * 0.01, 1e-16);
    EXPECT_THROW(penalty(1, 0.1, 0.0), ValidationError);
    EXPECT_THROW(penalty(1, 0.1, -1.0), ValidationError);
    EXPECT_THROW(penalty(1, -0.1, 1.0), ValidationError);
    EXPECT_THROW(penalty(0, 0.1, 1.0), ValidationError);
}

TEST(SelectM, EnumeratedCriterion) {
    // a_j^2 = 4, 1, 0.1, 0.01 and increment c * R_N = 0.5.
    const CoefficientVector c = coeffs({2.0, -1.0, std::sqrt(0.1), 0.1});
    const SelectionResult r = select_m(c, {1, 4}, 0.25, 2.0);
    const double expect[] = {-3.5, -4.0, -3.6, -3.11};
    ASSERT_EQ(r.criterion.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(r.criterion[k], expect[k], 1e-12);
    EXPECT_EQ(r.m_hat, 2u);
    EXPECT_EQ(r.c_cal, 2.0);
    EXPECT_EQ(r.rate, 0.25);
    EXPECT_EQ(r.criterion_at(3), r.criterion[2]);
}

TEST(SelectM, ZeroCoefficientsPickSmallestCandidate) {
    const CoefficientVector c = coeffs(std::vector<double>(12, 0.0));
    EXPECT_EQ(select_m(c, {2, 12}, 0.01, 2.0).m_hat, 2u);
    EXPECT_EQ(select_m(c, {3, 7}, 0.0, 2.0).m_hat, 3u);  // all tied
}

TEST(SelectM, TinyPenaltyPicksLargestCandidate) {
    const CoefficientVector c = coeffs({0.3, -0.2, 0.1, 0.05, 0.01, -0.02});
    EXPECT_EQ(select_m(c, {1, 6}, 0.01, std::numeric_limits<double>::min()).m_hat, 6u);
}

TEST(SelectM, Errors) {
    const CoefficientVector c = coeffs({1.0, 1.0, 1.0});
    EXPECT_THROW(select_m(c, {3, 2}, 0.1, 1.0), ValidationError);
    EXPECT_THROW(select_m(c, {0, 2}, 0.1, 1.0), ValidationError);
    EXPECT_THROW(select_m(c, {1, 4}, 0.1, 1.0), ValidationError);
    EXPECT_THROW(select_m(c, {1, 3}, 0.1, 0.0), ValidationError);
}

TEST(AdaptiveEstimate, ZeroDataGivesZeroEstimate) {
    const TimeGrid g(1.0, 150);
    const CoefficientVector c = compute_coefficients(SampledPath(g), TrigBasis(1.0, 12), 12);
    const auto [est, sel] = adaptive_estimate(c, {2, 12}, 0.0025, 2.0);
    EXPECT_EQ(sel.m_hat, 2u);
    EXPECT_EQ(est.dimension, 2u);
    for (double v : est.values.values()) EXPECT_EQ(v, 0.0);
}

// --- properties --------------------------------------------------------------

TEST(SelectionProperty, ScaleInvariance) {
    RngStream rng(2, 2);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(10);
        for (double& x : a) x = rng.normal() / (1.0 + trial % 7);
        const double rate = 0.01 + 0.001 * trial, scale = 0.25 + 0.1 * trial;
        std::vector<double> scaled = a;
        for (double& x : scaled) x *= scale;
        const auto r1 = select_m(coeffs(a), {1, 10}, rate, 2.0);
        const auto r2 = select_m(coeffs(scaled), {1, 10}, rate * scale * scale, 2.0);
        EXPECT_EQ(r1.m_hat, r2.m_hat);
    }
}

TEST(SelectionProperty, LargerPenaltyNeverSelectsLargerModel) {
    RngStream rng(3, 3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(12);
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = rng.normal() / (1.0 + static_cast<double>(j));
        std::size_t prev = 12;
        for (double c : {0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 16.0}) {
            const std::size_t m = select_m(coeffs(a), {1, 12}, 0.02, c).m_hat;
            EXPECT_LE(m, prev);
            prev = m;
        }
    }
}

TEST(SelectionProperty, CriterionMinimumAtSelectedModel) {
    RngStream rng(4, 4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(12);
        for (double& x : a) x = rng.normal() * 0.3;
        const auto r = select_m(coeffs(a), {2, 12}, 0.01, 1.0 + trial % 3);
        for (std::size_t m = 2; m <= 12; ++m) {
            EXPECT_LE(r.criterion_at(r.m_hat), r.criterion_at(m));
            if (m < r.m_hat) EXPECT_LT(r.criterion_at(r.m_hat), r.criterion_at(m));
        }
    }
}

TEST(SelectionProperty, OracleProximityOnIndependentGbmCopies) {
    const ExperimentSpec spec = canned_table2(0.0);
    const ScenarioSimulator sim(spec.scenario, spec.grid(), spec.copies);
    const ScenarioTruth tr = truth(spec.scenario, spec.horizon);
    const double rate = experiment_rate(spec);
    const TrigBasis basis(spec.horizon, spec.basis_dim);
    const auto& gbm = std::get<GbmCorrelated>(spec.scenario.model);
    double adaptive = 0.0, oracle = 0.0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        RngStream rng(spec.master_seed, r);
        const CoefficientVector c = compute_coefficients(sim.simulate(rng).x, basis, spec.basis_dim);
        const auto [est, sel] = adaptive_estimate(c, spec.candidates, rate, spec.c_cal);
        adaptive += mise(gbm_drift_estimate(est, gbm.sigma), *tr.drift);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = spec.candidates.lo; m <= spec.candidates.hi; ++m)
            best = std::min(best, mise(gbm_drift_estimate(derivative_estimate(c, m), gbm.sigma), *tr.drift));
        oracle += best;
    }
    EXPECT_LE(adaptive, 2.0 * oracle);
}
