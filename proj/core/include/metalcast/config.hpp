#pragma once

#include "metalcast/evaluation.hpp"
#include "metalcast/forecast_models.hpp"
#include "metalcast/mcs.hpp"
#include "metalcast/model_free.hpp"
#include "metalcast/nowcast.hpp"
#include "metalcast/pooling.hpp"
#include "metalcast/vintage_store.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metalcast {

enum class FileLayout { Vintages, Series };

/// One variable of the data manifest.
struct ManifestEntry {
    SeriesMeta meta;
    std::string file;  // resolved against the manifest directory
    FileLayout layout = FileLayout::Vintages;
    /// Harmonize index base years across vintages before validation.
    bool rebase = false;
};

/// INI file with one section per variable plus [panel] and [model_free]:
///
///   [panel]
///   first_vintage = 2000-01      ; first as_of for series-layout files
///   [IP]
///   file = IP.csv
///   layout = vintages            ; or series (obs_date,value, never revised)
///   transform = DLog
///   group = EcAct
///   publication_lag = 2
///   frequency = Monthly          ; or DailyAveraged
///   rebase = false
///   [model_free]
///   futures = futures.csv
///   survey_Copper = survey_copper.csv
struct DataManifest {
    std::vector<ManifestEntry> entries;
    std::optional<YearMonth> first_vintage;
    std::string futures_file;
    std::map<Metal, std::string> survey_files;
};

DataManifest load_manifest(const std::string& path);

/// Reads every manifest file and builds the panel. Rebased variables have
/// shared observations snapped to their first release when they agree to a
/// relative 1e-6 (base-year changes re-round the whole history).
RealTimePanel load_panel(const DataManifest& manifest);

struct ModelFreeData {
    std::vector<FuturesQuote> futures;
    std::map<Metal, std::vector<FixedEventSurvey>> surveys;
};

ModelFreeData load_model_free(const DataManifest& manifest);

struct BacktestConfig {
    std::string manifest;
    std::vector<Metal> metals{Metal::Copper, Metal::Aluminum, Metal::Nickel, Metal::Zinc};
    std::vector<ModelSpec> models;
    std::vector<int> horizons;  // default 1..24
    std::size_t window = 184;
    std::optional<YearMonth> first_origin;
    std::optional<YearMonth> last_origin;
    YearMonth base_month{2015, 2};
    std::string cpi_id = "CPI";

    NowcastModelSpec nowcast;
    std::size_t nowcast_window = 0;
    bool horse_race = false;
    std::vector<NowcastModelSpec> race_models;
    std::vector<std::string> race_variables;

    bool futures = true;
    bool survey = true;
    bool survey_deflate = true;

    DMOptions dm;
    McsConfig mcs;
    bool pooling = true;
    PoolingSpec pooling_spec;
    std::vector<int> table_horizons{1, 3, 6, 9, 12, 15, 18, 21, 24};
    std::size_t cumpath_skip = 12;

    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    int workers = 1;

    /// Throws ConfigError before any computation.
    void validate() const;
    [[nodiscard]] int max_horizon() const;
    /// True when any component draws random numbers (Bayesian nowcasts, MCS).
    [[nodiscard]] bool stochastic() const;
};

/// INI layout with sections [run], [nowcast], [evaluation], [pooling],
/// [model_free] and one [model:<id>] per forecasting model. Relative paths
/// resolve against the config file's directory.
BacktestConfig load_config(const std::string& path);
BacktestConfig parse_config(const std::string& content, const std::string& base_dir = ".");

/// "1-24", "1,3,6" or a mix such as "1-3,12".
std::vector<int> parse_int_list(const std::string& text);

}  // namespace metalcast
