#include "metalcast/model_free.hpp"

#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <tuple>

#include <fmt/format.h>

namespace metalcast {

CpiProjection cpi_index_projection(std::span<const double> history, int h) {
    if (h < 1) throw ConfigError("projection horizon must be >= 1");
    if (history.size() < static_cast<std::size_t>(h) + 1) {
        throw InsufficientDataError(fmt::format("CPI projection over {} months needs {} observations", h, h + 1));
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = static_cast<std::size_t>(h); t < history.size(); ++t) {
        if (!(history[t - static_cast<std::size_t>(h)] > 0.0)) throw DomainError("CPI must be positive");
        sum += history[t] / history[t - static_cast<std::size_t>(h)] - 1.0;
        ++count;
    }
    CpiProjection p;
    p.current = history.back();
    p.horizon = h;
    p.growth = sum / static_cast<double>(count);
    p.projected = p.current * (1.0 + p.growth);
    if (!(p.projected > 0.0)) throw DomainError("projected CPI is not positive");
    return p;
}

double futures_implied_real_price(const FuturesQuote& quote, const CpiProjection& projection) {
    if (quote.maturity != projection.horizon) {
        throw ConfigError(fmt::format("futures maturity {} does not match CPI projection horizon {}", quote.maturity,
                                      projection.horizon));
    }
    if (!(quote.price > 0.0)) throw DomainError("futures price must be positive");
    if (!(projection.projected > 0.0)) throw DomainError("projected CPI must be positive");
    return quote.price / projection.projected;
}

double fixed_event_to_fixed_horizon(const FixedEventSurvey& survey, int h) {
    const int d = survey.spacing;
    if (d < 1) throw ConfigError("survey event spacing must be >= 1");
    for (const auto& e : survey.events) {
        if (e.event_date - survey.survey_date == h) return e.mean_forecast;
    }
    for (const auto& lo : survey.events) {
        const int h1 = lo.event_date - survey.survey_date;
        if (h1 > h || h - h1 >= d) continue;
        for (const auto& hi : survey.events) {
            const int h2 = hi.event_date - survey.survey_date;
            if (h2 != h1 + d) continue;
            const double w1 = d - std::abs(h - h1);
            const double w2 = d - std::abs(h - h2);
            return (w1 * lo.mean_forecast + w2 * hi.mean_forecast) / d;
        }
    }
    throw CoverageError(fmt::format("survey of {} has no events bracketing horizon {}", survey.survey_date.str(), h));
}

namespace {

template <typename Fn>
void for_each_row(std::string_view content, std::string_view header_first, Fn&& fn) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool first = true;
    while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        auto line = csv::trim(content.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto fields = csv::split(line);
        if (first) {
            first = false;
            if (csv::trim(fields.front()) == header_first) continue;
        }
        fn(fields, line_no);
    }
}

YearMonth month_field(std::string_view text, std::size_t line) {
    text = csv::trim(text);
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') text = text.substr(0, 7);
    try {
        return YearMonth::parse(text);
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), line);
    }
}

}  // namespace

std::vector<FuturesQuote> parse_futures_csv(std::string_view content) {
    std::map<std::tuple<int, int, int>, std::pair<double, int>> acc;  // (metal, month, maturity)
    for_each_row(content, "metal", [&](const std::vector<std::string>& f, std::size_t line) {
        if (f.size() != 4) throw ParseError("expected metal,quote_date,maturity_months,price", line);
        Metal metal;
        try {
            metal = parse_metal(csv::trim(f[0]));
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), line);
        }
        const auto date = month_field(f[1], line);
        const int maturity = csv::to_int(f[2], line);
        const double price = csv::to_double(f[3], line);
        if (!(price > 0.0)) throw ParseError("futures price must be positive", line);
        if (maturity < 1) throw ParseError("maturity must be positive", line);
        auto& slot = acc[{static_cast<int>(metal), date.index(), maturity}];
        slot.first += price;
        slot.second += 1;
    });
    std::vector<FuturesQuote> out;
    for (const auto& [key, v] : acc) {
        FuturesQuote q;
        q.metal = static_cast<Metal>(std::get<0>(key));
        q.quote_date = YearMonth::from_index(std::get<1>(key));
        q.maturity = std::get<2>(key);
        q.price = v.first / v.second;
        out.push_back(q);
    }
    return out;
}

std::vector<FixedEventSurvey> parse_survey_csv(std::string_view content) {
    std::map<int, FixedEventSurvey> surveys;
    for_each_row(content, "survey_date", [&](const std::vector<std::string>& f, std::size_t line) {
        if (f.size() != 3) throw ParseError("expected survey_date,event_date,mean_forecast", line);
        const auto survey = month_field(f[0], line);
        const auto event = month_field(f[1], line);
        if (event.month() % 3 != 0) throw IntegrityError(fmt::format("event {} is not a quarter-end month (line {})", event.str(), line));
        if (event <= survey) throw IntegrityError(fmt::format("event precedes survey date (line {})", line));
        auto& s = surveys[survey.index()];
        s.survey_date = survey;
        for (const auto& e : s.events) {
            if (e.event_date == event) throw IntegrityError(fmt::format("duplicate event {} (line {})", event.str(), line));
        }
        s.events.push_back({event, csv::to_double(f[2], line)});
    });
    std::vector<FixedEventSurvey> out;
    for (auto& [k, s] : surveys) {
        std::sort(s.events.begin(), s.events.end(),
                  [](const SurveyEvent& a, const SurveyEvent& b) { return a.event_date < b.event_date; });
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace metalcast
