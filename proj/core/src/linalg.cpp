#include "metalcast/linalg.hpp"

#include "metalcast/errors.hpp"

#include <cmath>

#include <fmt/format.h>

namespace metalcast {

namespace {

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> checked_qr(const Eigen::MatrixXd& design) {
    if (design.rows() < design.cols()) {
        throw InsufficientDataError(fmt::format("{} observations for {} coefficients", design.rows(),
                                                design.cols()));
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) {
        throw RankError(fmt::format("design matrix has rank {} < {} columns", qr.rank(), design.cols()));
    }
    return qr;
}

}  // namespace

LeastSquaresFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    auto qr = checked_qr(design);
    LeastSquaresFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - design * fit.coef;
    fit.ssr = fit.residuals.squaredNorm();
    fit.nobs = static_cast<std::size_t>(design.rows());
    return fit;
}

Eigen::MatrixXd least_squares_multi(const Eigen::MatrixXd& design, const Eigen::MatrixXd& y) {
    return checked_qr(design).solve(y);
}

double mean(const Eigen::Ref<const Eigen::VectorXd>& x) { return x.mean(); }

double population_sd(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().mean());
}

}  // namespace metalcast
