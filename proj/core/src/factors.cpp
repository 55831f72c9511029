#include "metalcast/factors.hpp"

#include "metalcast/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace metalcast {

StandardizedPanel standardize_panel(const Eigen::MatrixXd& data, const std::vector<std::string>& ids,
                                    const std::vector<std::string>& exclude) {
    if (data.cols() != static_cast<Eigen::Index>(ids.size())) {
        throw DimensionError(fmt::format("panel has {} columns but {} ids", data.cols(), ids.size()));
    }
    if (data.rows() < 2) throw InsufficientDataError("standardization needs at least 2 rows");
    StandardizedPanel out;
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < ids.size(); ++j) {
        if (std::find(exclude.begin(), exclude.end(), ids[j]) != exclude.end()) {
            out.excluded_ids.push_back(ids[j]);
        } else {
            keep.push_back(static_cast<Eigen::Index>(j));
            out.ids.push_back(ids[j]);
        }
    }
    const auto T = data.rows();
    const auto N = static_cast<Eigen::Index>(keep.size());
    out.x.resize(T, N);
    out.means.resize(N);
    out.sds.resize(N);
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto col = data.col(keep[static_cast<std::size_t>(k)]);
        if (!col.allFinite()) throw DataError(fmt::format("non-finite value in column {}", out.ids[static_cast<std::size_t>(k)]));
        const double m = col.mean();
        const double sd = std::sqrt((col.array() - m).square().sum() / static_cast<double>(T));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
            throw DegenerateColumnError(fmt::format("column {} has zero variance", out.ids[static_cast<std::size_t>(k)]));
        }
        out.means(k) = m;
        out.sds(k) = sd;
        out.x.col(k) = (col.array() - m) / sd;
    }
    return out;
}

Eigen::MatrixXd FactorModel::reconstruct() const {
    const double n = static_cast<double>(loadings.cols());
    Eigen::MatrixXd common = factors * loadings;
    return options.divide_by_n ? common : Eigen::MatrixXd(common / n);
}

FactorModel extract_factors(const StandardizedPanel& panel, int r, const FactorOptions& options) {
    const auto T = panel.x.rows();
    const auto N = panel.x.cols();
    if (r < 1 || r > std::min<Eigen::Index>(T - 1, N)) {
        throw DimensionError(fmt::format("factor count {} outside [1, min(T-1, N)] = [1, {}]", r,
                                         std::min<Eigen::Index>(T - 1, N)));
    }
    const Eigen::MatrixXd cov = panel.x.transpose() * panel.x / static_cast<double>(T);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("eigen decomposition did not converge");

    FactorModel fm;
    fm.options = options;
    fm.ids = panel.ids;
    fm.excluded_ids = panel.excluded_ids;
    fm.column_means = panel.means;
    fm.column_sds = panel.sds;
    fm.total_variance = cov.trace();
    fm.eigenvalues.resize(r);
    fm.loadings.resize(r, N);
    const double root_n = std::sqrt(static_cast<double>(N));
    for (int k = 0; k < r; ++k) {
        const auto src = N - 1 - k;  // eigenvalues come out ascending
        fm.eigenvalues(k) = std::max(eig.eigenvalues()(src), 0.0);
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        fm.loadings.row(k) = root_n * v.transpose();
    }
    fm.factors = panel.x * fm.loadings.transpose();
    if (options.divide_by_n) fm.factors /= static_cast<double>(N);
    return fm;
}

std::string factors_to_csv(const FactorModel& model, const std::vector<YearMonth>& dates) {
    if (dates.size() != static_cast<std::size_t>(model.factors.rows())) {
        throw DimensionError("factor dump: date count does not match factor rows");
    }
    std::string out = "date";
    for (int k = 1; k <= model.rank(); ++k) out += fmt::format(",factor_{}", k);
    out += "\n";
    for (std::size_t t = 0; t < dates.size(); ++t) {
        out += dates[t].str();
        for (int k = 0; k < model.rank(); ++k) out += fmt::format(",{}", model.factors(static_cast<Eigen::Index>(t), k));
        out += "\n";
    }
    return out;
}

}  // namespace metalcast
