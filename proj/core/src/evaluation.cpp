#include "metalcast/evaluation.hpp"

#include "metalcast/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace metalcast {

LossMatrix::LossMatrix(int horizon, std::vector<YearMonth> dates, std::vector<std::string> models,
                       Eigen::MatrixXd losses)
    : horizon_(horizon), dates_(std::move(dates)), models_(std::move(models)), losses_(std::move(losses)) {
    if (losses_.rows() != static_cast<Eigen::Index>(dates_.size()) ||
        losses_.cols() != static_cast<Eigen::Index>(models_.size())) {
        throw DimensionError(fmt::format("loss matrix is {}x{} but has {} dates and {} models", losses_.rows(),
                                         losses_.cols(), dates_.size(), models_.size()));
    }
    for (Eigen::Index i = 0; i < losses_.size(); ++i) {
        const double v = losses_.data()[i];
        if (!std::isnan(v) && v < 0.0) throw DomainError("negative loss");
    }
}

std::optional<std::size_t> LossMatrix::model_index(std::string_view id) const {
    for (std::size_t i = 0; i < models_.size(); ++i) {
        if (models_[i] == id) return i;
    }
    return std::nullopt;
}

std::vector<std::size_t> LossMatrix::common_rows(std::span<const std::size_t> columns) const {
    std::vector<std::size_t> rows;
    for (Eigen::Index r = 0; r < losses_.rows(); ++r) {
        bool ok = true;
        for (auto c : columns) ok = ok && !std::isnan(losses_(r, static_cast<Eigen::Index>(c)));
        if (ok) rows.push_back(static_cast<std::size_t>(r));
    }
    return rows;
}

LossMatrix LossMatrix::complete_block(std::span<const std::size_t> columns) const {
    auto rows = common_rows(columns);
    Eigen::MatrixXd block(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
    std::vector<YearMonth> dates;
    std::vector<std::string> models;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        dates.push_back(dates_[rows[i]]);
        for (std::size_t j = 0; j < columns.size(); ++j) {
            block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                losses_(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(columns[j]));
        }
    }
    for (auto c : columns) models.push_back(models_[c]);
    return {horizon_, std::move(dates), std::move(models), std::move(block)};
}

LossMatrix LossMatrix::scaled(double factor) const {
    return {horizon_, dates_, models_, losses_ * factor};
}

double rmsfe(std::span<const double> errors) {
    if (errors.empty()) throw EmptySampleError("rmsfe of an empty sample");
    double sum = 0.0;
    for (double e : errors) sum += e * e;
    return std::sqrt(sum / static_cast<double>(errors.size()));
}

std::string_view stars(Significance s) {
    switch (s) {
        case Significance::One: return "***";
        case Significance::Five: return "**";
        case Significance::Ten: return "*";
        case Significance::None: return "";
    }
    return "";
}

Significance normal_significance(double statistic) {
    const double a = std::abs(statistic);
    if (a > 2.576) return Significance::One;
    if (a > 1.960) return Significance::Five;
    if (a > 1.645) return Significance::Ten;
    return Significance::None;
}

DMResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b, int horizon,
                 const DMOptions& options) {
    if (loss_a.size() != loss_b.size()) throw DimensionError("dm_test: loss series differ in length");
    if (horizon < 1) throw ConfigError("dm_test: horizon must be >= 1");
    const std::size_t n = loss_a.size();
    if (n < 8) throw InsufficientDataError(fmt::format("dm_test needs at least 8 observations, got {}", n));

    std::vector<double> d(n);
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        d[t] = loss_a[t] - loss_b[t];
        mean += d[t];
    }
    mean /= static_cast<double>(n);

    auto autocov = [&](std::size_t k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) s += (d[t] - mean) * (d[t - k] - mean);
        return s / static_cast<double>(n);
    };
    const double gamma0 = autocov(0);
    if (!(gamma0 > 0.0)) throw DegenerateTestError("loss differential has zero variance");

    DMResult r;
    r.n = n;
    r.truncation_lag = horizon - 1;
    double lrv = gamma0;
    for (int k = 1; k < horizon && static_cast<std::size_t>(k) < n; ++k) {
        const double w = 1.0 - static_cast<double>(k) / static_cast<double>(horizon);
        lrv += 2.0 * w * autocov(static_cast<std::size_t>(k));
    }
    if (!(lrv > 0.0)) {
        lrv = gamma0;
        r.naive_variance = true;
    }
    r.statistic = mean / std::sqrt(lrv / static_cast<double>(n));

    if (options.variance == DmVariance::Hln) {
        const double T = static_cast<double>(n);
        const double h = horizon;
        const double factor = (T + 1.0 - 2.0 * h + h * (h - 1.0) / T) / T;
        r.statistic *= std::sqrt(std::max(factor, 0.0));
        boost::math::students_t dist(T - 1.0);
        const double a = std::abs(r.statistic);
        if (a > boost::math::quantile(dist, 0.995)) r.level = Significance::One;
        else if (a > boost::math::quantile(dist, 0.975)) r.level = Significance::Five;
        else if (a > boost::math::quantile(dist, 0.95)) r.level = Significance::Ten;
    } else {
        r.level = normal_significance(r.statistic);
    }
    return r;
}

namespace {

double column_sum(const Eigen::MatrixXd& m, std::span<const std::size_t> rows, std::size_t col) {
    double s = 0.0;
    for (auto r : rows) s += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
    return s;
}

}  // namespace

std::vector<RatioCell> ratio_table(const LossMatrix& losses, std::string_view benchmark,
                                   const DMOptions& options) {
    auto bench = losses.model_index(benchmark);
    if (!bench) throw ConfigError(fmt::format("benchmark '{}' not in loss matrix", benchmark));
    const auto& L = losses.losses();
    std::vector<RatioCell> out;
    for (std::size_t m = 0; m < losses.models().size(); ++m) {
        RatioCell cell;
        cell.model = losses.models()[m];
        cell.is_benchmark = m == *bench;
        if (cell.is_benchmark) {
            const std::size_t cols[] = {m};
            auto rows = losses.common_rows(cols);
            cell.n = rows.size();
            if (rows.empty()) throw EmptySampleError("benchmark has no evaluated forecasts");
            cell.value = std::sqrt(column_sum(L, rows, m) / static_cast<double>(rows.size()));
            out.push_back(std::move(cell));
            continue;
        }
        const std::size_t cols[] = {m, *bench};
        auto rows = losses.common_rows(cols);
        cell.n = rows.size();
        if (rows.empty()) {
            cell.value = std::numeric_limits<double>::quiet_NaN();
            cell.dm_note = "no common dates with benchmark";
            out.push_back(std::move(cell));
            continue;
        }
        const double nn = static_cast<double>(rows.size());
        cell.value = std::sqrt(column_sum(L, rows, m) / nn) / std::sqrt(column_sum(L, rows, *bench) / nn);
        std::vector<double> a, b;
        for (auto r : rows) {
            a.push_back(L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)));
            b.push_back(L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*bench)));
        }
        try {
            cell.dm = dm_test(a, b, losses.horizon(), options);
        } catch (const Error& e) {
            cell.dm_note = e.what();
        }
        out.push_back(std::move(cell));
    }
    return out;
}

std::vector<CumulativePath> cumulative_ratio_path(const LossMatrix& losses, std::string_view benchmark,
                                                  std::size_t skip) {
    auto bench = losses.model_index(benchmark);
    if (!bench) throw ConfigError(fmt::format("benchmark '{}' not in loss matrix", benchmark));
    const auto& L = losses.losses();
    std::vector<CumulativePath> out;
    for (std::size_t m = 0; m < losses.models().size(); ++m) {
        if (m == *bench) continue;
        const std::size_t cols[] = {m, *bench};
        auto rows = losses.common_rows(cols);
        if (skip >= rows.size()) {
            throw InsufficientDataError(fmt::format("{}: {} common dates, cannot skip {}", losses.models()[m],
                                                    rows.size(), skip));
        }
        CumulativePath path;
        path.model = losses.models()[m];
        double sm = 0.0;
        double sb = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            sm += L(static_cast<Eigen::Index>(rows[k]), static_cast<Eigen::Index>(m));
            sb += L(static_cast<Eigen::Index>(rows[k]), static_cast<Eigen::Index>(*bench));
            if (k < skip) continue;
            const double nn = static_cast<double>(k + 1);
            path.dates.push_back(losses.dates()[rows[k]]);
            path.ratio.push_back(std::sqrt(sm / nn) / std::sqrt(sb / nn));
        }
        out.push_back(std::move(path));
    }
    return out;
}

std::string format_ratio(double value, const std::optional<DMResult>& dm, int decimals) {
    if (std::isnan(value)) return "-";
    auto s = fmt::format("{:.{}f}", value, decimals);
    if (dm) s += stars(dm->level);
    return s;
}

}  // namespace metalcast
