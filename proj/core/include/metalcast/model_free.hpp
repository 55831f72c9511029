#pragma once

#include "metalcast/vintage_store.hpp"
#include "metalcast/year_month.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metalcast {

struct FuturesQuote {
    Metal metal = Metal::Copper;
    YearMonth quote_date;
    int maturity = 3;
    double price = 0.0;  // nominal USD/ton
};

struct CpiProjection {
    double current = 0.0;    // p_T
    int horizon = 1;
    double growth = 0.0;     // mean h-period growth rate
    double projected = 0.0;  // p_T (1 + growth)
};

/// Projects the index h months ahead with the sample mean of h-period growth
/// rates p_t / p_{t-h} - 1 over `history`. Needs at least h + 1 values.
CpiProjection cpi_index_projection(std::span<const double> history, int h);

/// F / p̂. The projection must be expressed relative to the deflation base
/// month so the result is in the same real units as the model forecasts.
double futures_implied_real_price(const FuturesQuote& quote, const CpiProjection& projection);

struct SurveyEvent {
    YearMonth event_date;
    double mean_forecast = 0.0;
};

/// Mean survey forecasts for quarter-end event months.
struct FixedEventSurvey {
    YearMonth survey_date;
    std::vector<SurveyEvent> events;
    int spacing = 3;
};

/// Linear interpolation between the events bracketing horizon h:
/// ((d - |h - h1|) y1 + (d - |h - h2|) y2) / d with h2 = h1 + d.
/// Throws CoverageError when no bracket exists.
double fixed_event_to_fixed_horizon(const FixedEventSurvey& survey, int h);

/// Futures CSV: metal,quote_date,maturity_months,price. Daily quote dates are
/// averaged to months per (metal, maturity).
std::vector<FuturesQuote> parse_futures_csv(std::string_view content);
/// Survey CSV: survey_date,event_date,mean_forecast. Events must fall in
/// March, June, September or December.
std::vector<FixedEventSurvey> parse_survey_csv(std::string_view content);

inline constexpr int kFuturesMaturities[] = {3, 15};
inline constexpr int kSurveyMinHorizon = 6;
inline constexpr int kSurveyMaxHorizon = 18;

}  // namespace metalcast
