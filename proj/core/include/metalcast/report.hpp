#pragma once

#include "metalcast/backtest.hpp"
#include "metalcast/config.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace metalcast {

std::string_view library_version();

/// metal,model,origin,horizon,growth,level,origin_price,realized. Numbers are
/// written in shortest round-trip form, an empty realized cell means the
/// outcome was not observed.
std::string forecasts_to_csv(const std::vector<ForecastRecord>& forecasts);
std::vector<ForecastRecord> forecasts_from_csv(std::string_view content);

/// Tab separated: metal, model, origin, horizon, stage, message.
std::string errors_to_log(const std::vector<ErrorEntry>& errors);
std::vector<ErrorEntry> errors_from_log(std::string_view content);

/// Table layout: Model plus one column per table horizon. The benchmark row
/// holds the RMSPE, other rows the ratio to it with DM stars.
std::string ratio_table_csv(const MetalEvaluation& ev, const std::vector<int>& horizons, std::string_view benchmark);
/// One row per (model, horizon) with unrounded values.
std::string ratio_table_long_csv(const MetalEvaluation& ev, const std::vector<int>& horizons);
std::string mcs_json(const MetalEvaluation& ev);
/// Rows RW-D (RMSPE, no decimals), SSM25 and Top 2 (ratios with DM stars).
std::string pooling_table_csv(const MetalEvaluation& ev, const std::vector<int>& horizons, std::string_view benchmark);
/// date,model,ratio for every model at one horizon.
std::string cumpath_csv(const std::vector<CumulativePath>& paths);
/// metal,horizon,variant,origin,level,members,warmup,fallback.
std::string pools_csv(const std::vector<PoolRecord>& pools);
/// Config echo, seed and versions. Worker count and output directory are
/// left out so the file is identical across them.
std::string run_manifest_json(const BacktestConfig& config);

/// Writes every report file into `dir` (created when missing). Throws
/// IoError when a file cannot be written.
void emit_report(const BacktestReport& report, const BacktestConfig& config, const std::string& dir);

}  // namespace metalcast
