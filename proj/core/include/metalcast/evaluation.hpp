#pragma once

#include "metalcast/year_month.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metalcast {

/// Squared prediction errors: one row per evaluation date, one column per
/// model. NaN marks dates where a model has no forecast.
class LossMatrix {
public:
    LossMatrix() = default;
    /// Throws DimensionError on shape mismatch and DomainError on negative losses.
    LossMatrix(int horizon, std::vector<YearMonth> dates, std::vector<std::string> models,
               Eigen::MatrixXd losses);

    [[nodiscard]] int horizon() const { return horizon_; }
    [[nodiscard]] const std::vector<YearMonth>& dates() const { return dates_; }
    [[nodiscard]] const std::vector<std::string>& models() const { return models_; }
    [[nodiscard]] const Eigen::MatrixXd& losses() const { return losses_; }
    [[nodiscard]] std::optional<std::size_t> model_index(std::string_view id) const;

    /// Rows where every listed column is observed.
    [[nodiscard]] std::vector<std::size_t> common_rows(std::span<const std::size_t> columns) const;
    /// Sub-matrix of the listed columns restricted to their common rows.
    [[nodiscard]] LossMatrix complete_block(std::span<const std::size_t> columns) const;
    [[nodiscard]] LossMatrix scaled(double factor) const;

private:
    int horizon_ = 1;
    std::vector<YearMonth> dates_;
    std::vector<std::string> models_;
    Eigen::MatrixXd losses_;
};

/// Root mean squared error. Throws EmptySampleError on empty input.
double rmsfe(std::span<const double> errors);

enum class Significance { None, Ten, Five, One };
std::string_view stars(Significance s);
/// Two-sided standard normal critical values 1.645 / 1.960 / 2.576.
Significance normal_significance(double statistic);

enum class DmVariance {
    Hac,  // Bartlett kernel, truncation lag h - 1
    Hln   // Hac plus the Harvey-Leybourne-Newbold small-sample factor, Student-t critical values
};

struct DMOptions {
    DmVariance variance = DmVariance::Hac;
};

struct DMResult {
    double statistic = 0.0;
    Significance level = Significance::None;
    std::size_t n = 0;
    int truncation_lag = 0;
    /// Set when the HAC long-run variance was not positive and the plain
    /// variance was used instead.
    bool naive_variance = false;
};

/// Diebold-Mariano test of equal accuracy on aligned loss series. A positive
/// statistic means `loss_a` is larger on average.
/// Throws DegenerateTestError when the loss differential has zero variance.
DMResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b, int horizon,
                 const DMOptions& options = {});

struct RatioCell {
    std::string model;
    bool is_benchmark = false;
    /// Raw RMSPE for the benchmark, RMSPE ratio otherwise.
    double value = 0.0;
    std::size_t n = 0;
    std::optional<DMResult> dm;
    /// Why the DM test was not available, if it was not.
    std::string dm_note;
};

/// One cell per model in LossMatrix order. Each model is compared with the
/// benchmark on their common dates.
std::vector<RatioCell> ratio_table(const LossMatrix& losses, std::string_view benchmark,
                                   const DMOptions& options = {});

struct CumulativePath {
    std::string model;
    std::vector<YearMonth> dates;
    std::vector<double> ratio;
};

/// Ratio of cumulative RMSPEs (model over benchmark) from the first common
/// date through each date, reported after the first `skip` periods.
std::vector<CumulativePath> cumulative_ratio_path(const LossMatrix& losses, std::string_view benchmark,
                                                  std::size_t skip);

/// Ratio string as printed in the tables: fixed decimals plus DM stars.
std::string format_ratio(double value, const std::optional<DMResult>& dm, int decimals);

}  // namespace metalcast
