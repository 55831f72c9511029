#pragma once

#include "metalcast/year_month.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace metalcast {

/// Gap-free monthly series: values[i] is the observation for start + i.
struct MonthlySeries {
    YearMonth start;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] bool empty() const { return values.empty(); }
    /// Last observation date. Undefined for an empty series.
    [[nodiscard]] YearMonth last() const { return start + static_cast<int>(values.size()) - 1; }
    [[nodiscard]] bool contains(YearMonth date) const {
        return !values.empty() && date >= start && date <= last();
    }
    [[nodiscard]] std::optional<double> find(YearMonth date) const {
        if (!contains(date)) return std::nullopt;
        return values[static_cast<std::size_t>(date - start)];
    }
    /// Throws CoverageError when the date is outside the series.
    [[nodiscard]] double at(YearMonth date) const;

    /// Observations in [from, to]; throws CoverageError when not fully covered.
    [[nodiscard]] MonthlySeries slice(YearMonth from, YearMonth to) const;
    /// Last n observations (or all when shorter).
    [[nodiscard]] MonthlySeries tail(std::size_t n) const;

    [[nodiscard]] std::span<const double> view() const { return values; }

    friend bool operator==(const MonthlySeries&, const MonthlySeries&) = default;
};

}  // namespace metalcast
