#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace metalcast {

struct LeastSquaresFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    double ssr = 0.0;
    std::size_t nobs = 0;

    /// ML variance estimate ssr / n.
    [[nodiscard]] double sigma2_ml() const { return ssr / static_cast<double>(nobs); }
    /// Unbiased variance estimate ssr / (n - k).
    [[nodiscard]] double sigma2() const {
        return ssr / static_cast<double>(nobs - static_cast<std::size_t>(coef.size()));
    }
};

/// Ordinary least squares via column-pivoting QR. Throws RankError when the
/// design is rank deficient.
LeastSquaresFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

/// Multi-response OLS sharing one design (one column of coefficients per response).
Eigen::MatrixXd least_squares_multi(const Eigen::MatrixXd& design, const Eigen::MatrixXd& y);

/// Mean and 1/T standard deviation.
double mean(const Eigen::Ref<const Eigen::VectorXd>& x);
double population_sd(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace metalcast
