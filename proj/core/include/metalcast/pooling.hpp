#pragma once

#include "metalcast/mcs.hpp"
#include "metalcast/vintage_store.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace metalcast {

enum class PoolVariant { All, SSM, Top2 };

/// Output model id of each variant: pool_all, pool_ssm25, pool_top2.
std::string pool_id(PoolVariant v);

struct PoolingSpec {
    /// Origins pooled with the plain average before screening starts.
    int warmup = 12;
    /// Realized origins used by each MCS screen.
    int screen_window = 12;
    double alpha = 0.25;
    /// Replications, block and seed of the screening MCS. Alphas are ignored.
    McsConfig mcs;

    /// Throws ConfigError unless warmup >= screen_window >= 1 and 0 < alpha < 1.
    void validate() const;
};

/// Arithmetic mean. Throws EmptySampleError on an empty set.
double pool_average(std::span<const double> forecasts);

/// Level forecasts of every model for one (metal, horizon), by origin.
struct HorizonStream {
    Metal metal = Metal::Copper;
    int horizon = 1;
    std::vector<YearMonth> origins;  // increasing
    std::vector<std::string> models;
    Eigen::MatrixXd levels;          // origins x models, NaN where a model has no forecast
    std::vector<double> realized;    // per origin, NaN when not yet observed
};

struct PooledForecast {
    YearMonth origin;
    double level = 0.0;
    std::vector<std::string> members;
    bool warmup = false;
    /// Screening was not possible (short history or fewer than two
    /// candidates) and the pool fell back to a plain average.
    bool fallback = false;
};

/// Real-time pooled forecasts, one per origin with at least one forecast.
/// After the warmup, origin T screens with MCS on the latest `screen_window`
/// origins whose horizon-h outcome is known at T (origin <= T - h), using
/// the models that are complete on that window and available at T.
std::vector<PooledForecast> pool_stream(const HorizonStream& stream, PoolVariant variant, const PoolingSpec& spec);

/// pool_stream for several variants at once; the screening MCS runs once per
/// origin and is shared. Result i belongs to variants[i].
std::vector<std::vector<PooledForecast>> pool_streams(const HorizonStream& stream,
                                                      std::span<const PoolVariant> variants, const PoolingSpec& spec);

}  // namespace metalcast
