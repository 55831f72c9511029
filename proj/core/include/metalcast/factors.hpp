#pragma once

#include "metalcast/year_month.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace metalcast {

/// Columns standardized to mean 0 and (1/T) standard deviation 1.
struct StandardizedPanel {
    Eigen::MatrixXd x;  // T x N
    std::vector<std::string> ids;
    Eigen::VectorXd means;
    Eigen::VectorXd sds;
    std::vector<std::string> excluded_ids;
};

/// `data` is T x N with one column per entry of `ids`. Columns listed in
/// `exclude` are dropped. Throws DegenerateColumnError naming the variable
/// when a retained column has zero variance.
StandardizedPanel standardize_panel(const Eigen::MatrixXd& data, const std::vector<std::string>& ids,
                                    const std::vector<std::string>& exclude = {});

struct FactorOptions {
    /// F = x L' / N when true, F = x L' otherwise.
    bool divide_by_n = true;
};

struct FactorModel {
    Eigen::MatrixXd loadings;     // r x N, L L' / N = I
    Eigen::MatrixXd factors;      // T x r
    Eigen::VectorXd eigenvalues;  // r, descending
    double total_variance = 0.0;  // trace of the sample covariance
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_sds;
    std::vector<std::string> ids;
    std::vector<std::string> excluded_ids;
    FactorOptions options;

    [[nodiscard]] int rank() const { return static_cast<int>(loadings.rows()); }
    /// Common component F L, rescaled to the standardized data units.
    [[nodiscard]] Eigen::MatrixXd reconstruct() const;
    /// Sum of the retained eigenvalues.
    [[nodiscard]] double variance_explained() const { return eigenvalues.sum(); }
    [[nodiscard]] double variance_share() const { return total_variance > 0 ? variance_explained() / total_variance : 0; }
};

/// Principal components of the 1/T sample covariance of x. Loadings are
/// sqrt(N) times the top eigenvectors, each row flipped so its
/// largest-magnitude entry is positive.
/// Throws DimensionError unless 1 <= r <= min(T - 1, N).
FactorModel extract_factors(const StandardizedPanel& panel, int r, const FactorOptions& options = {});

/// CSV with columns date,factor_1,...,factor_r; `dates` aligns with the rows.
std::string factors_to_csv(const FactorModel& model, const std::vector<YearMonth>& dates);

}  // namespace metalcast
