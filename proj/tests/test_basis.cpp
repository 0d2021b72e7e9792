#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "driftlab/basis.hpp"

using namespace driftlab;

namespace {
constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);
}  // namespace

TEST(TrigBasis, Values) {
    const TrigBasis b(1.0, 12);
    for (double t : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(eval_basis(b, 1, t), 1.0);
    EXPECT_DOUBLE_EQ(eval_basis(b, 2, 0.0), kSqrt2);
    EXPECT_NEAR(eval_basis(b, 3, 0.25), kSqrt2, 1e-15);
    EXPECT_NEAR(eval_basis(b, 5, 0.125), kSqrt2, 1e-15);  // sin(2*pi*2*t) at t = 1/8

    const TrigBasis b2(4.0, 3);
    EXPECT_DOUBLE_EQ(b2.value(1, 2.0), 0.5);
    EXPECT_NEAR(b2.value(2, 2.0), -std::sqrt(0.5), 1e-15);
}

TEST(TrigBasis, Derivatives) {
    const TrigBasis b(1.0, 12);
    for (double t : {0.0, 0.4, 1.0}) EXPECT_EQ(eval_basis_derivative(b, 1, t), 0.0);
    EXPECT_NEAR(eval_basis_derivative(b, 2, 0.0), 0.0, 1e-15);
    EXPECT_NEAR(eval_basis_derivative(b, 3, 0.0), kSqrt2 * 2 * kPi, 1e-13);
}

TEST(TrigBasis, RangeChecks) {
    const TrigBasis b(2.0, 5);
    EXPECT_THROW(b.value(0, 1.0), ValidationError);
    EXPECT_THROW(b.value(6, 1.0), ValidationError);
    EXPECT_THROW(b.value(2, -0.1), ValidationError);
    EXPECT_THROW(b.value(2, 2.1), ValidationError);
    EXPECT_THROW(b.derivative(6, 1.0), ValidationError);
    EXPECT_THROW(TrigBasis(0.0, 3), ValidationError);
    EXPECT_THROW(TrigBasis(1.0, 0), ValidationError);
    EXPECT_THROW(b.sample(1, TimeGrid(1.0, 10)), GridMismatchError);
}

TEST(Complexity, L) {
    EXPECT_DOUBLE_EQ(complexity_L(1, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(complexity_L(3, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(complexity_L(2, 2.0), 1.5);
    EXPECT_THROW(complexity_L(0, 1.0), ValidationError);
}

TEST(Complexity, LBar) {
    EXPECT_EQ(complexity_Lbar(1, 1.0), 0.0);
    EXPECT_NEAR(complexity_Lbar(3, 1.0), 16 * kPi * kPi, 1e-10);
    EXPECT_NEAR(complexity_Lbar(5, 1.0), 16 * kPi * kPi + 64 * kPi * kPi, 1e-10);
    EXPECT_THROW(complexity_Lbar(0, 1.0), ValidationError);
}

// --- properties --------------------------------------------------------------

TEST(TrigBasisProperty, SupNormsMatchComplexities) {
    // Brute-force sup over a fine grid against the closed forms.
    for (double T : {1.0, 2.5}) {
        const TrigBasis b(T, 9);
        double l = 0.0, lbar = 0.0;
        for (std::size_t j = 1; j <= 9; ++j) {
            double s = 0.0, ds = 0.0;
            for (int k = 0; k <= 20000; ++k) {
                const double t = T * k / 20000.0;
                s = std::max(s, std::abs(b.value(j, t)));
                ds = std::max(ds, std::abs(b.derivative(j, t)));
            }
            l += s * s;
            lbar += ds * ds;
            EXPECT_NEAR(l, complexity_L(j, T), 1e-9 * l);
            EXPECT_NEAR(lbar, complexity_Lbar(j, T), 1e-6 * (1.0 + lbar));
        }
    }
}

TEST(TrigBasisProperty, GramMatrixIsIdentity) {
    const TimeGrid g(1.0, 1000);
    const TrigBasis b(1.0, 12);
    for (std::size_t j = 1; j <= 12; ++j)
        for (std::size_t k = 1; k <= 12; ++k)
            EXPECT_NEAR(l2_inner(b.sample(j, g), b.sample(k, g)), j == k ? 1.0 : 0.0, 1e-3) << j << "," << k;
}

TEST(TrigBasisProperty, DerivativeMatchesCentralDifference) {
    const double h = 1e-4;
    for (double T : {1.0, 3.0}) {
        const TrigBasis b(T, 12);
        for (std::size_t j = 1; j <= 12; ++j)
            for (double frac : {0.1, 0.37, 0.5, 0.9}) {
                const double t = frac * T;
                const double fd = (b.value(j, t + h) - b.value(j, t - h)) / (2 * h);
                // Central-difference truncation: amplitude * omega^3 * h^2 / 6.
                const double omega = 2 * kPi * static_cast<double>(j / 2) / T;
                const double bound = std::sqrt(2.0 / T) * omega * omega * omega * h * h / 6 + 1e-8;
                EXPECT_NEAR(fd, b.derivative(j, t), bound)
                    << "j = " << j << " t = " << t;
            }
    }
}

TEST(TrigBasisProperty, ComplexityGrowth) {
    for (std::size_t m = 1; m < 50; ++m)
        EXPECT_NEAR(complexity_L(m + 1, 1.0) - complexity_L(m, 1.0), 2.0, 1e-12);
    double worst = 0.0;
    for (std::size_t m = 1; m <= 50; ++m) worst = std::max(worst, complexity_Lbar(m, 1.0) / std::pow(m, 3));
    // sum_{i<=m} 8 pi^2 floor(i/2)^2 <= 8 pi^2 m^3 / 12 up to lower-order terms.
    EXPECT_LE(worst, 8 * kPi * kPi);
}
