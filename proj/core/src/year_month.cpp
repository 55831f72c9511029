#include "metalcast/year_month.hpp"

#include "metalcast/errors.hpp"
#include "metalcast/series.hpp"

#include <charconv>

#include <fmt/format.h>

namespace metalcast {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(fmt::format("invalid year-month '{}'", whole));
    }
    return value;
}

}  // namespace

YearMonth YearMonth::parse(std::string_view text) {
    int year = 0;
    int month = 0;
    if (text.size() == 7 && text[4] == '-') {
        year = parse_int(text.substr(0, 4), text);
        month = parse_int(text.substr(5, 2), text);
    } else if (text.size() == 6) {
        year = parse_int(text.substr(0, 4), text);
        month = parse_int(text.substr(4, 2), text);
    } else {
        throw ConfigError(fmt::format("invalid year-month '{}'", text));
    }
    if (month < 1 || month > 12) throw ConfigError(fmt::format("invalid month in '{}'", text));
    return {year, month};
}

std::string YearMonth::str() const { return fmt::format("{:04d}-{:02d}", year(), month()); }

double MonthlySeries::at(YearMonth date) const {
    if (!contains(date)) throw CoverageError(fmt::format("no observation at {}", date.str()));
    return values[static_cast<std::size_t>(date - start)];
}

MonthlySeries MonthlySeries::slice(YearMonth from, YearMonth to) const {
    if (to < from) return {from, {}};
    if (!contains(from) || !contains(to)) {
        throw CoverageError(fmt::format("series [{}, {}] does not cover [{}, {}]", start.str(),
                                        empty() ? start.str() : last().str(), from.str(), to.str()));
    }
    auto first = values.begin() + (from - start);
    return {from, std::vector<double>(first, first + (to - from) + 1)};
}

MonthlySeries MonthlySeries::tail(std::size_t n) const {
    if (n >= values.size()) return *this;
    const auto skip = static_cast<int>(values.size() - n);
    return {start + skip, std::vector<double>(values.begin() + skip, values.end())};
}

}  // namespace metalcast
