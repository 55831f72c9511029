#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace metalcast {

/// Calendar month. Stored as a running month count so that date arithmetic
/// is plain integer arithmetic.
class YearMonth {
public:
    constexpr YearMonth() = default;
    constexpr YearMonth(int year, int month) : index_(year * 12 + (month - 1)) {}

    /// Accepts "YYYY-MM" or "YYYYMM".
    static YearMonth parse(std::string_view text);
    static constexpr YearMonth from_yyyymm(int yyyymm) { return {yyyymm / 100, yyyymm % 100}; }
    static constexpr YearMonth from_index(int index) {
        YearMonth ym;
        ym.index_ = index;
        return ym;
    }

    [[nodiscard]] constexpr int year() const { return index_ / 12; }
    [[nodiscard]] constexpr int month() const { return index_ % 12 + 1; }
    [[nodiscard]] constexpr int index() const { return index_; }
    [[nodiscard]] constexpr int yyyymm() const { return year() * 100 + month(); }

    /// "YYYY-MM"
    [[nodiscard]] std::string str() const;

    constexpr YearMonth operator+(int months) const { return from_index(index_ + months); }
    constexpr YearMonth operator-(int months) const { return from_index(index_ - months); }
    constexpr YearMonth& operator+=(int months) {
        index_ += months;
        return *this;
    }
    friend constexpr int operator-(YearMonth a, YearMonth b) { return a.index_ - b.index_; }

    constexpr auto operator<=>(const YearMonth&) const = default;

private:
    int index_ = 0;
};

}  // namespace metalcast

template <>
struct std::hash<metalcast::YearMonth> {
    std::size_t operator()(const metalcast::YearMonth& ym) const noexcept {
        return std::hash<int>{}(ym.index());
    }
};
