#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "driftlab/errors.hpp"
#include "driftlab/grid.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

// Eigenvalues above -kPsdTolerance are clamped to zero; below it the matrix is rejected.
inline constexpr double kPsdTolerance = 1e-10;

// Grid sizes (points, t = 0 included) up to this use Cholesky; larger use circulant embedding.
inline constexpr std::size_t kCholeskyMaxPoints = 4096;

inline void validate_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw ValidationError("Hurst parameter must lie in (0,1), got " + std::to_string(hurst));
}

// R_H(s,t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
inline double fbm_covariance(double hurst, double s, double t) {
    validate_hurst(hurst);
    detail::require(s >= 0.0 && t >= 0.0, "fbm_covariance: times must be nonnegative");
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(t - s), e));
}

struct FbmParams {
    double hurst;
    double sigma = 1.0;

    void validate() const {
        validate_hurst(hurst);
        detail::require(std::isfinite(sigma) && sigma != 0.0, "fBm scale sigma must be a nonzero real");
    }
};

/**
 * Symmetric matrix with unit diagonal and entries in [-1, 1].
 *
 * Positive semidefiniteness is not checked here; it is enforced when the
 * square root is taken (matrix_sqrt throws NotPsdError).
 */
class CorrelationMatrix {
public:
    explicit CorrelationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
        detail::require(m_.rows() == m_.cols() && m_.rows() >= 1, "CorrelationMatrix: must be square and nonempty");
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            detail::require(m_(i, i) == 1.0, "CorrelationMatrix: diagonal entries must be 1");
            for (Eigen::Index k = 0; k < m_.cols(); ++k) {
                detail::require(std::abs(m_(i, k)) <= 1.0, "CorrelationMatrix: entries must lie in [-1,1]");
                detail::require(m_(i, k) == m_(k, i), "CorrelationMatrix: must be symmetric");
            }
        }
    }

    static CorrelationMatrix identity(std::size_t n) {
        return CorrelationMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    double operator()(std::size_t i, std::size_t k) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }

private:
    Eigen::MatrixXd m_;
};

// (gamma^{|i-k|})_{i,k}; PSD for every gamma in [0,1).
inline CorrelationMatrix toeplitz_corr(double gamma, std::size_t n) {
    detail::require(gamma >= 0.0 && gamma < 1.0, "toeplitz_corr: gamma must lie in [0,1)");
    detail::require(n >= 1, "toeplitz_corr: size must be positive");
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd m(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index k = 0; k < N; ++k) m(i, k) = std::pow(gamma, static_cast<double>(std::abs(i - k)));
    return CorrelationMatrix(std::move(m));
}

/// Principal square root of a symmetric PSD matrix via eigendecomposition.
/// Eigenvalues in [-kPsdTolerance, 0) are clamped; anything lower throws NotPsdError.
inline Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& m) {
    detail::require(m.rows() == m.cols(), "matrix_sqrt: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) throw NotPsdError("matrix_sqrt: eigendecomposition failed");
    Eigen::VectorXd lambda = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -kPsdTolerance)
            throw NotPsdError("matrix_sqrt: eigenvalue " + std::to_string(lambda(i)) + " is negative");
        lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    }
    const Eigen::MatrixXd& v = eig.eigenvectors();
    Eigen::MatrixXd s = v * lambda.asDiagonal() * v.transpose();
    return 0.5 * (s + s.transpose());
}

inline Eigen::MatrixXd matrix_sqrt(const CorrelationMatrix& m) { return matrix_sqrt(m.matrix()); }

enum class FbmMethod { automatic, cholesky, circulant };

inline const char* to_string(FbmMethod m) {
    switch (m) {
        case FbmMethod::automatic: return "automatic";
        case FbmMethod::cholesky: return "cholesky";
        case FbmMethod::circulant: return "circulant";
    }
    return "?";
}

/**
 * Exact sampler of sigma * B^H on a uniform grid.
 *
 * Construction does the expensive part once: either the Cholesky factor of
 * the grid covariance (times t_1..t_n; t_0 = 0 is deterministic) or the
 * eigenvalues of the circulant embedding of fractional Gaussian noise
 * (Davies-Harte). sample() is const and can be called concurrently with
 * distinct streams.
 */
class FbmSampler {
public:
    FbmSampler(FbmParams params, TimeGrid grid, FbmMethod method = FbmMethod::automatic)
        : params_(params), grid_(grid) {
        params_.validate();
        FbmMethod want = method;
        if (want == FbmMethod::automatic)
            want = grid_.size() <= kCholeskyMaxPoints ? FbmMethod::cholesky : FbmMethod::circulant;
        if (want == FbmMethod::circulant && build_circulant()) {
            method_ = FbmMethod::circulant;
        } else {
            build_cholesky();
            method_ = FbmMethod::cholesky;
        }
    }

    FbmMethod method() const noexcept { return method_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    const FbmParams& params() const noexcept { return params_; }

    // Lower-triangular factor of the covariance on t_1..t_n (empty when circulant).
    const Eigen::MatrixXd& factor() const noexcept { return factor_; }

    std::vector<SampledPath> sample_paths(std::size_t count, RngStream& rng) const {
        std::vector<SampledPath> out;
        out.reserve(count);
        if (method_ == FbmMethod::cholesky) {
            const std::size_t n = grid_.subintervals();
            Eigen::VectorXd xi(static_cast<Eigen::Index>(n));
            for (std::size_t p = 0; p < count; ++p) {
                for (std::size_t l = 0; l < n; ++l) xi(static_cast<Eigen::Index>(l)) = rng.normal();
                Eigen::VectorXd y = factor_.triangularView<Eigen::Lower>() * xi;
                std::vector<double> v(n + 1, 0.0);
                for (std::size_t l = 0; l < n; ++l) v[l + 1] = y(static_cast<Eigen::Index>(l));
                out.emplace_back(grid_, std::move(v));
            }
        } else {
            while (out.size() < count) {
                auto [re, im] = circulant_pair(rng);
                out.push_back(std::move(re));
                if (out.size() < count) out.push_back(std::move(im));
            }
        }
        return out;
    }

    PathEnsemble sample(std::size_t count, RngStream& rng) const {
        detail::require(count >= 1, "sample_fbm_paths: count must be >= 1");
        return PathEnsemble(grid_, sample_paths(count, rng));
    }

private:
    void build_cholesky() {
        const std::size_t n = grid_.subintervals();
        const auto N = static_cast<Eigen::Index>(n);
        const double s2 = params_.sigma * params_.sigma;
        Eigen::MatrixXd cov(N, N);
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index k = 0; k <= i; ++k) {
                const double c = s2 * fbm_covariance(params_.hurst, grid_.point(static_cast<std::size_t>(i) + 1),
                                                     grid_.point(static_cast<std::size_t>(k) + 1));
                cov(i, k) = c;
                cov(k, i) = c;
            }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
        } else {
            // Numerically singular covariance: fall back to the clamped symmetric root.
            factor_ = matrix_sqrt(cov);
        }
    }

    // Returns false when the embedding has a significantly negative eigenvalue.
    bool build_circulant() {
        const std::size_t n = grid_.subintervals();
        const std::size_t m = 2 * n;
        const double e = 2.0 * params_.hurst;
        auto acov = [e](double k) {
            return 0.5 * (std::pow(std::abs(k + 1.0), e) - 2.0 * std::pow(std::abs(k), e) + std::pow(std::abs(k - 1.0), e));
        };
        std::vector<std::complex<double>> row(m);
        for (std::size_t j = 0; j <= n; ++j) row[j] = acov(static_cast<double>(j));
        for (std::size_t j = n + 1; j < m; ++j) row[j] = row[m - j];
        std::vector<std::complex<double>> spec;
        Eigen::FFT<double> fft;
        fft.fwd(spec, row);
        double lmax = 0.0;
        for (const auto& z : spec) lmax = std::max(lmax, std::abs(z.real()));
        sqrt_eig_.assign(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double lambda = spec[k].real();
            if (lambda < -kPsdTolerance * std::max(1.0, lmax)) return false;
            sqrt_eig_[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
        }
        return true;
    }

    std::pair<SampledPath, SampledPath> circulant_pair(RngStream& rng) const {
        const std::size_t n = grid_.subintervals();
        const std::size_t m = sqrt_eig_.size();
        std::vector<std::complex<double>> w(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double a = rng.normal();
            const double b = rng.normal();
            w[k] = sqrt_eig_[k] * std::complex<double>(a, b);
        }
        std::vector<std::complex<double>> y;
        Eigen::FFT<double> fft;
        fft.fwd(y, w);
        // Real and imaginary parts are independent fGn samples with unit step.
        const double scale = params_.sigma * std::pow(grid_.step(), params_.hurst);
        std::vector<double> re(n + 1, 0.0), im(n + 1, 0.0);
        for (std::size_t l = 0; l < n; ++l) {
            re[l + 1] = re[l] + scale * y[l].real();
            im[l + 1] = im[l] + scale * y[l].imag();
        }
        return {SampledPath(grid_, std::move(re)), SampledPath(grid_, std::move(im))};
    }

    FbmParams params_;
    TimeGrid grid_;
    FbmMethod method_ = FbmMethod::cholesky;
    Eigen::MatrixXd factor_;
    std::vector<double> sqrt_eig_;
};

inline PathEnsemble sample_fbm_paths(const FbmParams& params, const TimeGrid& grid, std::size_t count, RngStream& rng,
                                     FbmMethod method = FbmMethod::automatic) {
    return FbmSampler(params, grid, method).sample(count, rng);
}

/// N Brownian motions with E(Z^i_s Z^k_t) = sigma^2 Gamma^{i,k} min(s,t), built by
/// mixing i.i.d. Gaussian increments through a precomputed square root of Gamma.
inline PathEnsemble correlated_bm_from_root(const TimeGrid& grid, const Eigen::MatrixXd& root, double sigma,
                                            RngStream& rng) {
    const auto N = root.rows();
    detail::require(N >= 1 && root.cols() == N, "correlated_bm: square root must be square");
    const double scale = sigma * std::sqrt(grid.step());
    std::vector<std::vector<double>> vals(static_cast<std::size_t>(N), std::vector<double>(grid.size(), 0.0));
    Eigen::VectorXd xi(N);
    for (std::size_t l = 0; l < grid.subintervals(); ++l) {
        for (Eigen::Index i = 0; i < N; ++i) xi(i) = rng.normal();
        const Eigen::VectorXd dz = root * xi;
        for (Eigen::Index i = 0; i < N; ++i) {
            auto& v = vals[static_cast<std::size_t>(i)];
            v[l + 1] = v[l] + scale * dz(i);
        }
    }
    std::vector<SampledPath> paths;
    paths.reserve(vals.size());
    for (auto& v : vals) paths.emplace_back(grid, std::move(v));
    return PathEnsemble(grid, std::move(paths));
}

inline PathEnsemble correlated_bm_ensemble(const TimeGrid& grid, const CorrelationMatrix& corr, double sigma,
                                           RngStream& rng) {
    detail::require(std::isfinite(sigma), "correlated_bm_ensemble: sigma must be finite");
    return correlated_bm_from_root(grid, matrix_sqrt(corr), sigma, rng);
}

/// Z^i_t = phi^i t + sigma B^i_t with phi^i ~ N(0, sigma_phi^2) and B^i independent fBm(H).
/// The random effects are drawn first, then the fBm paths.
inline PathEnsemble random_effect_from_sampler(const FbmSampler& fbm, double sigma_phi, std::size_t count,
                                               RngStream& rng) {
    detail::require(std::isfinite(sigma_phi) && sigma_phi > 0.0, "random effect: sigma_phi must be positive");
    detail::require(count >= 1, "random effect: need at least one path");
    std::vector<double> phi(count);
    for (double& p : phi) p = sigma_phi * rng.normal();
    std::vector<SampledPath> paths = fbm.sample_paths(count, rng);
    const TimeGrid& grid = fbm.grid();
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t l = 0; l < grid.size(); ++l) paths[i][l] += phi[i] * grid.point(l);
    return PathEnsemble(grid, std::move(paths));
}

inline PathEnsemble random_effect_fbm_ensemble(double hurst, double sigma, double sigma_phi, const TimeGrid& grid,
                                               std::size_t count, RngStream& rng) {
    return random_effect_from_sampler(FbmSampler(FbmParams{hurst, sigma}, grid), sigma_phi, count, rng);
}

}  // namespace driftlab
