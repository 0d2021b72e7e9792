#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/errors.hpp"
#include "driftlab/estimators.hpp"

namespace driftlab {

// Candidate dimensions {lo, ..., hi}.
struct CandidateRange {
    std::size_t lo = 1;
    std::size_t hi = 1;

    bool empty() const noexcept { return lo < 1 || hi < lo; }
    std::size_t size() const noexcept { return empty() ? 0 : hi - lo + 1; }
    bool contains(std::size_t m) const noexcept { return !empty() && m >= lo && m <= hi; }
};

struct SelectionResult {
    std::size_t m_hat = 0;
    CandidateRange candidates;
    std::vector<double> criterion;  // criterion[m - lo] = gamma_N(b'_m) + pen(m)
    double c_cal = 0.0;
    double rate = 0.0;              // R_N

    double criterion_at(std::size_t m) const { return criterion.at(m - candidates.lo); }
};

// gamma_N evaluated at its minimizer over S_m: -sum_{j<=m} a_j^2.
inline double objective_gamma(const CoefficientVector& coeffs, std::size_t m) {
    if (m > coeffs.size())
        throw ValidationError("objective_gamma: m = " + std::to_string(m) + " exceeds M = " + std::to_string(coeffs.size()));
    double acc = 0.0;
    for (std::size_t j = 1; j <= m; ++j) acc += coeffs[j] * coeffs[j];
    return -acc;
}

// pen(m) = c_cal * m * R_N.
inline double penalty(std::size_t m, double rate, double c_cal) {
    detail::require(m >= 1, "penalty: m must be >= 1");
    detail::require(rate >= 0.0, "penalty: R_N must be nonnegative");
    detail::require(std::isfinite(c_cal) && c_cal > 0.0, "penalty: c_cal must be positive");
    return c_cal * static_cast<double>(m) * rate;
}

// argmin over the candidates of gamma_N(b'_m) + pen(m); ties go to the smallest m.
inline SelectionResult select_m(const CoefficientVector& coeffs, CandidateRange candidates, double rate, double c_cal) {
    if (candidates.empty()) throw ValidationError("select_m: candidate set is empty");
    if (candidates.hi > coeffs.size())
        throw ValidationError("select_m: largest candidate " + std::to_string(candidates.hi) + " exceeds M = " +
                              std::to_string(coeffs.size()));
    SelectionResult r;
    r.candidates = candidates;
    r.c_cal = c_cal;
    r.rate = rate;
    r.criterion.reserve(candidates.size());
    double best = 0.0;
    for (std::size_t m = candidates.lo; m <= candidates.hi; ++m) {
        const double c = objective_gamma(coeffs, m) + penalty(m, rate, c_cal);
        r.criterion.push_back(c);
        if (m == candidates.lo || c < best) {
            best = c;
            r.m_hat = m;
        }
    }
    return r;
}

// b' = b'_{m_hat}.
inline std::pair<EstimateFn, SelectionResult> adaptive_estimate(const CoefficientVector& coeffs,
                                                                CandidateRange candidates, double rate, double c_cal) {
    SelectionResult sel = select_m(coeffs, candidates, rate, c_cal);
    EstimateFn est = derivative_estimate(coeffs, sel.m_hat);
    return {std::move(est), std::move(sel)};
}

}  // namespace driftlab
