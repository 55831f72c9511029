#pragma once

#include "metalcast/factors.hpp"
#include "metalcast/nowcast.hpp"
#include "metalcast/series.hpp"
#include "metalcast/vintage_store.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metalcast {

inline constexpr int kMaxHorizon = 24;

enum class ModelFamily { RWD, AR, ARDL, ARDI, VAR, FAVAR };

std::string_view to_string(ModelFamily f);
ModelFamily parse_model_family(std::string_view text);

/// Fixed lag order, or AIC selection over 1..max.
struct LagOrder {
    int value = 1;
    bool aic = false;
    int max = 6;
};

struct ModelSpec {
    std::string id;
    ModelFamily family = ModelFamily::RWD;
    /// Own lags (AR, ARDL, ARDI) or VAR lags (VAR, FAVAR).
    LagOrder p;
    /// Lags of each predictor (ARDL) or factor (ARDI).
    LagOrder s;
    /// ARDL: variable ids and/or group names (Prices, EcAct, CU, ET,
    /// ExRates, Inventories, Target). The forecast target is always dropped.
    std::vector<std::string> predictors;
    /// Factor count (ARDI, FAVAR). ARDI with r = 0 is the AR model.
    int r = 0;
    /// VAR/FAVAR endogenous set. "price" and "inventory" stand for the target
    /// metal's own series; other entries are variable ids.
    std::vector<std::string> endogenous{"price", "inventory", "NO-M"};
    /// Forces the extra coefficient blocks to zero (ARDL/ARDI -> AR, FAVAR -> VAR).
    bool restricted = false;
    /// VAR/FAVAR: iterate a one-step VAR instead of direct projection.
    bool iterated = false;
    FactorOptions factor_options;

    /// Throws ConfigError for missing or inconsistent fields.
    void validate() const;
};

/// Everything a model may condition on at one forecast origin: the real
/// target price and the transformed, nowcast-completed predictors.
struct ForecastContext {
    Metal metal = Metal::Copper;
    YearMonth origin;
    /// Observations of target growth in each estimation window.
    std::size_t window = 184;
    /// Real price levels through origin.
    MonthlySeries real_price;
    /// Δlog real price through origin.
    MonthlySeries growth;
    /// Transformed predictor series through origin, keyed by id. Other
    /// metals' prices enter as Δlog real prices.
    std::map<std::string, MonthlySeries> predictors;
    std::map<std::string, Group> groups;

    [[nodiscard]] double origin_price() const { return real_price.at(origin); }
    [[nodiscard]] std::string target_id() const { return price_id(metal); }
};

/// Builds the context from a completed snapshot. Nominal metal prices are
/// deflated by the snapshot CPI at `base_month`.
ForecastContext make_context(const Snapshot& snapshot, const RealTimePanel& panel, Metal metal, std::size_t window,
                             YearMonth base_month, const std::string& cpi_id = "CPI");

/// Resolves ARDL predictor tokens (ids or group names) to ids; drops the
/// target, keeps first-seen order. Throws ConfigError on an unknown token.
std::vector<std::string> resolve_predictors(const ForecastContext& ctx, const std::vector<std::string>& tokens);

struct DirectProjection {
    int horizon = 1;
    double intercept = 0.0;
    Eigen::VectorXd coef;
    double sigma2 = 0.0;  // ML residual variance
    std::size_t nobs = 0;
    double aic = 0.0;

    [[nodiscard]] double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        return intercept + x.dot(coef.transpose());
    }
};

/// OLS of y[t + h] on (1, X[t, :]) for t = 0 .. n-1-h. `y` and the rows of X
/// share dates. Needs at least #coefficients + 10 aligned rows.
DirectProjection direct_projection_fit(std::span<const double> y, const Eigen::MatrixXd& X, int h);

/// Lagged regressor matrix over a window: row t holds, block by block,
/// series[t], series[t-1], ..., series[t-L+1]. Rows start at `first_row`
/// (>= max L - 1) and run to the end of the window.
Eigen::MatrixXd lag_design(const std::vector<std::span<const double>>& series, const std::vector<int>& lags,
                           std::size_t first_row);

/// Per-equation direct projection of a VAR. Y is T x n; the result is
/// (1 + n p) x n with column k holding equation k as
/// [const, series 1 lags 1..p, series 2 lags 1..p, ...].
Eigen::MatrixXd var_direct_fit(const Eigen::MatrixXd& Y, int p, int h);

/// Growth forecasts ĝ_{T+h} at one horizon.
double forecast_rwd(const ForecastContext& ctx, int h);
double forecast_ar(const ForecastContext& ctx, const ModelSpec& spec, int h);
double forecast_ardl(const ForecastContext& ctx, const ModelSpec& spec, int h);
double forecast_ardi(const ForecastContext& ctx, const ModelSpec& spec, int h);
double forecast_var(const ForecastContext& ctx, const ModelSpec& spec, int h);
double forecast_favar(const ForecastContext& ctx, const ModelSpec& spec, int h);

/// ĝ_{T+1..T+H} for any family; shares factor extraction across horizons.
std::vector<double> forecast_fan(const ForecastContext& ctx, const ModelSpec& spec, int max_horizon = kMaxHorizon);

/// P_T exp(sum of the first h growths). Throws IncompleteFanError when a
/// growth for 1..h is missing or non-finite.
double reconstruct_level(double origin_price, std::span<const double> growth, int h);

struct ForecastRecord {
    Metal metal = Metal::Copper;
    std::string model;
    YearMonth origin;
    int horizon = 1;
    /// One-month log growth forecast for month origin + h. Model-free and
    /// pooled records carry the average monthly log growth log(level / P_T) / h.
    double growth = 0.0;
    double level = 0.0;
    /// P_T, the real price at the origin.
    double origin_price = 0.0;
    std::optional<double> realized;
};

}  // namespace metalcast
