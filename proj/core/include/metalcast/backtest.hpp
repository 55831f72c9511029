#pragma once

#include "metalcast/config.hpp"
#include "metalcast/evaluation.hpp"
#include "metalcast/forecast_models.hpp"
#include "metalcast/mcs.hpp"
#include "metalcast/nowcast.hpp"
#include "metalcast/pooling.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metalcast {

/// Model ids of the model-free forecasts.
inline constexpr const char* kFuturesId = "Futures";
inline constexpr const char* kSurveyId = "Survey";

/// A (model, origin, horizon) cell that produced no forecast.
struct ErrorEntry {
    Metal metal = Metal::Copper;
    std::string model;
    YearMonth origin;
    int horizon = 1;
    std::string stage;  // nowcast, context, model, model_free
    std::string message;
};

struct PoolRecord {
    Metal metal = Metal::Copper;
    int horizon = 1;
    PoolVariant variant = PoolVariant::All;
    PooledForecast forecast;
};

/// Evaluation of one target metal. Maps are keyed by horizon.
struct MetalEvaluation {
    Metal metal = Metal::Copper;
    /// Loss matrix columns: configured models, model-free ids present in the
    /// forecasts, then pools. The benchmark comes first.
    std::vector<std::string> models;
    std::map<int, LossMatrix> losses;
    std::map<int, std::vector<RatioCell>> ratios;
    std::map<int, MCSResult> mcs;
    /// Why MCS did not run at a horizon.
    std::map<int, std::string> mcs_notes;
    std::map<int, std::vector<CumulativePath>> cumpaths;
};

struct BacktestReport {
    std::string benchmark;
    std::vector<YearMonth> origins;
    /// Sorted by metal, model (column order), origin, horizon. Includes pools.
    std::vector<ForecastRecord> forecasts;
    std::vector<ErrorEntry> errors;
    std::vector<PoolRecord> pools;
    std::vector<MetalEvaluation> metals;
    std::optional<NowcastReport> nowcast;

    [[nodiscard]] const MetalEvaluation& evaluation(Metal m) const;
};

/// Forecast origins: [first_origin, last_origin] clipped to the panel's
/// vintages. Throws ConfigError when the range is empty or outside the panel.
std::vector<YearMonth> forecast_origins(const BacktestConfig& config, const RealTimePanel& panel);

/// Root seeds of the stochastic stages, derived from config.seed.
struct StageSeeds {
    std::uint64_t nowcast = 0;
    std::uint64_t evaluation = 0;
    std::uint64_t pooling = 0;
    std::uint64_t race = 0;
};
StageSeeds stage_seeds(const BacktestConfig& config);

/// Loads the manifest and runs the whole pipeline.
BacktestReport run_backtest(const BacktestConfig& config);
BacktestReport run_backtest(const BacktestConfig& config, const RealTimePanel& panel, const ModelFreeData& model_free);

/// Evaluation half of run_backtest: pooling, loss matrices, ratio tables, MCS
/// and cumulative paths from model forecasts carrying their realizations.
/// Pool records in `forecasts` are ignored and rebuilt.
BacktestReport evaluate_forecasts(const BacktestConfig& config, std::vector<ForecastRecord> forecasts,
                                  std::vector<ErrorEntry> errors);

}  // namespace metalcast
