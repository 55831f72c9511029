#pragma once

#include "metalcast/errors.hpp"
#include "metalcast/evaluation.hpp"
#include "metalcast/series.hpp"
#include "metalcast/vintage_store.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metalcast {

enum class NowcastFamily { RWD, AR, ARAIC, BAR, BARSV, BARSVO };

/// Table label, e.g. "RW-D", "AR(AIC)", "BAR(1)-SVo".
std::string_view display_name(NowcastFamily f);
/// Accepts RWD, AR, ARAIC, BAR, BARSV, BARSVO (case sensitive).
NowcastFamily parse_nowcast_family(std::string_view text);

struct McmcConfig {
    /// Retained draws; the sampler runs burn_in + draws iterations.
    int draws = 2000;
    int burn_in = 1000;
    std::uint64_t seed = 0;
    /// Prior variance of the AR coefficients (standardized data scale).
    double prior_coef_var = 10.0;
};

struct NowcastModelSpec {
    NowcastFamily family = NowcastFamily::RWD;
    /// Lag order for AR, largest candidate lag for ARAIC.
    int max_lag = 1;
    McmcConfig mcmc;

    /// Throws ConfigError when max_lag < 1 or draws <= burn_in < 0 for Bayesian families.
    void validate() const;
};

/// y_T + h * mean(first differences).
double rwd_forecast(std::span<const double> history, int h);

struct ArFit {
    double intercept = 0.0;
    std::vector<double> coefs;  // lag 1 first
    double sigma2 = 0.0;        // ML residual variance
    std::size_t nobs = 0;
    double aic = 0.0;

    /// Iterates the fitted recursion from the end of `history`, h = 1..horizons.
    [[nodiscard]] std::vector<double> forecast_path(std::span<const double> history, int horizons) const;
};

/// OLS of y_t on (1, y_{t-1}, ..., y_{t-p}). Needs at least p + 10 observations.
ArFit ar_ols_fit(std::span<const double> history, int p);
/// Same regression on the sample that drops the first `skip` (>= p) observations.
ArFit ar_ols_fit_from(std::span<const double> history, int p, std::size_t skip);

/// Lag in [1, p_max] minimizing T_eff * ln(sigma2) + 2 (p + 1) on the common
/// sample that drops p_max initial observations. Ties go to the smaller lag.
int select_lag_aic(std::span<const double> history, int p_max);

struct BayesNowcast {
    /// Posterior predictive mean and the posterior sd of the conditional mean, h = 1..H.
    std::vector<double> mean;
    std::vector<double> sd;
    /// Posterior mean / sd of (intercept, AR(1) coefficient) on the data scale.
    Eigen::Vector2d coef_mean = Eigen::Vector2d::Zero();
    Eigen::Vector2d coef_sd = Eigen::Vector2d::Zero();
    /// A constant history short-circuits to that constant with zero sd and
    /// empty per-observation vectors.
    /// Posterior mean log variance per regression observation (history[1..]); SV families only.
    std::vector<double> log_vol_mean;
    /// Posterior probability of an outlier scale > 1 per regression observation; SVo only.
    std::vector<double> outlier_prob;
};

/// Bayesian AR(1) with constant volatility (Gibbs, independent Normal and
/// Inverse-Gamma priors).
BayesNowcast bar_posterior(std::span<const double> history, const NowcastModelSpec& spec, int horizons = 3);
/// Bayesian AR(1) with random-walk log volatility (7-component mixture sampler).
BayesNowcast bar_sv_posterior(std::span<const double> history, const NowcastModelSpec& spec, int horizons = 3);
/// As bar_sv_posterior plus a per-observation outlier scale in {1, ..., 10}.
BayesNowcast bar_svo_posterior(std::span<const double> history, const NowcastModelSpec& spec, int horizons = 3);

/// Point nowcasts h = 1..horizons for any family. `seed` overrides spec.mcmc.seed.
std::vector<double> nowcast_path(std::span<const double> history, const NowcastModelSpec& spec, int horizons,
                                 std::uint64_t seed);

/// Raised by fill_missing_tail; carries the variable id.
class NowcastFailure : public Error {
public:
    NowcastFailure(std::string variable, const std::string& what)
        : Error(variable + ": " + what), variable_(std::move(variable)) {}
    [[nodiscard]] const std::string& variable() const { return variable_; }

private:
    std::string variable_;
};

/// Every variable observed through `as_of`, ragged edge filled with nowcasts.
struct Snapshot {
    YearMonth as_of;
    std::map<std::string, MonthlySeries> series;
    /// Number of nowcast months appended per variable.
    std::map<std::string, int> filled;
};

struct NowcastOptions {
    /// Estimation window in observations (0 = whole vintage).
    std::size_t window = 0;
};

/// Fills missing trailing months of each variable's vintage at `as_of`.
/// Observed values are copied unchanged. Bayesian samplers are seeded from
/// (spec seed, variable id, as_of).
Snapshot fill_missing_tail(const RealTimePanel& panel, YearMonth as_of, const NowcastModelSpec& model,
                           const NowcastOptions& options = {});

struct HorseRaceConfig {
    YearMonth first_vintage;
    YearMonth last_vintage;
    std::size_t window = 0;
    /// Variables to evaluate; empty means every variable with a publication lag.
    std::vector<std::string> variables;
    int workers = 1;
    DMOptions dm;
};

struct NowcastCell {
    std::string variable;
    int horizon = 1;
    std::string model;
    double rmsfe = 0.0;
    /// rmsfe / rmsfe(RW-D); 1 for RW-D itself.
    double ratio = 1.0;
    std::optional<DMResult> dm;
    std::size_t n = 0;
};

struct NowcastReport {
    std::vector<std::string> models;  // display names, RW-D first
    std::vector<std::string> variables;
    int max_horizon = 0;
    std::vector<NowcastCell> cells;

    [[nodiscard]] const NowcastCell* find(std::string_view variable, int horizon, std::string_view model) const;
    /// Table layout: ID,Horizon,<model columns>; RW-D holds raw RMSFE, other
    /// columns hold ratios with DM stars, "-" where the horizon does not exist.
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string to_json() const;
};

/// Nowcasts every evaluation vintage with each model and scores them against
/// the first-release value published later. The first model must be RW-D.
NowcastReport nowcast_horse_race(const RealTimePanel& panel, const std::vector<NowcastModelSpec>& models,
                                 const HorseRaceConfig& config);

}  // namespace metalcast
