#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace driftlab {

// Real polynomial c_0 + c_1 t + ... ; the closed-form drift family used by the scenarios.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {}

    static Polynomial zero() { return Polynomial{}; }
    static Polynomial identity() { return Polynomial({0.0, 1.0}); }
    static Polynomial monomial(std::size_t degree, double scale = 1.0) {
        std::vector<double> c(degree + 1, 0.0);
        c[degree] = scale;
        return Polynomial(std::move(c));
    }

    const std::vector<double>& coefficients() const noexcept { return c_; }
    double coefficient(std::size_t k) const noexcept { return k < c_.size() ? c_[k] : 0.0; }

    double operator()(double t) const noexcept {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return Polynomial{};
        std::vector<double> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
        return Polynomial(std::move(d));
    }

    // Antiderivative vanishing at 0.
    Polynomial antiderivative() const {
        std::vector<double> a(c_.size() + 1, 0.0);
        for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / static_cast<double>(k + 1);
        return Polynomial(std::move(a));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> s(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = a.coefficient(k) + b.coefficient(k);
        return Polynomial(std::move(s));
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    std::vector<double> c_;
};

}  // namespace driftlab
