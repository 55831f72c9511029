#pragma once

#include "metalcast/config.hpp"
#include "metalcast/vintage_store.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace metalcast {

enum class SynthDgp {
    AR,     // independent AR(1)
    Factor  // loads on the common factors plus an AR(1) idiosyncratic term
};

/// One macro predictor of the synthetic panel. The DGP generates a
/// stationary signal x_t which is mapped to levels according to `transform`.
struct SynthVariable {
    SeriesMeta meta;
    SynthDgp dgp = SynthDgp::Factor;
    double persistence = 0.5;  // AR(1) coefficient of x (or of its idiosyncratic part)
    double scale = 0.01;       // x_t -> growth (DLog, D2Log) or log deviation (Log)
};

/// Table 1 predictor list with its transforms and publication lags.
std::vector<SynthVariable> default_synth_variables();

struct SynthSpec {
    std::uint64_t seed = 20150401;
    YearMonth start{1998, 1};
    YearMonth first_vintage{2013, 1};
    YearMonth last_vintage{2022, 5};
    /// Common factors, a diagonal VAR(1).
    int factors = 2;
    double factor_persistence = 0.7;
    std::vector<SynthVariable> variables = default_synth_variables();
    /// Metals block: a VAR(1) in real price growth and inventory growth with
    /// lagged factors as exogenous drivers.
    double price_own_lag = 0.25;
    double price_factor_loading = 0.02;
    double price_volatility = 0.05;
    double inventory_volatility = 0.04;
    bool futures = true;
    bool survey = true;
};

/// Monthly paths of every synthetic variable (levels, nominal prices).
struct SynthData {
    std::vector<SeriesMeta> metas;
    std::vector<MonthlySeries> levels;  // aligned with metas
    std::vector<FuturesQuote> futures;
    std::map<Metal, std::vector<FixedEventSurvey>> surveys;
};

SynthData generate_synth(const SynthSpec& spec);

/// First-release panel built from the synthetic paths.
RealTimePanel synth_panel(const SynthSpec& spec, const SynthData& data);

/// Writes the data files, manifest.ini and backtest.ini into `dir`. The
/// backtest config is the bundled end-to-end run; `seed` is its run seed.
void write_synth(const SynthSpec& spec, const SynthData& data, const std::string& dir, std::uint64_t seed);

/// Content of the bundled backtest config with the given run seed.
std::string default_backtest_ini(const SynthSpec& spec, std::uint64_t seed);

/// Single-variable panel: y_t = phi y_{t-1} + sigma e_t, published with
/// `lag` months of delay, vintages over the last `vintages` months.
RealTimePanel ar1_panel(std::uint64_t seed, double phi, double sigma, int T, int lag, int vintages,
                        const std::string& id = "Y");

}  // namespace metalcast
