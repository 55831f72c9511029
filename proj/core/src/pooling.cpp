#include "metalcast/pooling.hpp"

#include "metalcast/errors.hpp"
#include "metalcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace metalcast {

std::string pool_id(PoolVariant v) {
    switch (v) {
        case PoolVariant::All: return "pool_all";
        case PoolVariant::SSM: return "pool_ssm25";
        case PoolVariant::Top2: return "pool_top2";
    }
    return "pool";
}

void PoolingSpec::validate() const {
    if (screen_window < 1) throw ConfigError("pooling screen_window must be >= 1");
    if (warmup < screen_window) throw ConfigError("pooling warmup must be >= screen_window");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("pooling alpha must lie in (0, 1)");
}

double pool_average(std::span<const double> forecasts) {
    if (forecasts.empty()) throw EmptySampleError("cannot pool an empty forecast set");
    double s = 0.0;
    for (double f : forecasts) s += f;
    return s / static_cast<double>(forecasts.size());
}

namespace {

// Mean of the members, kept inside their range so rounding can never push the
// pooled forecast outside the convex hull.
double hull_mean(const std::vector<double>& values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) return *lo;
    return std::clamp(pool_average(values), *lo, *hi);
}

}  // namespace

std::vector<std::vector<PooledForecast>> pool_streams(const HorizonStream& stream,
                                                      std::span<const PoolVariant> variants, const PoolingSpec& spec) {
    spec.validate();
    const auto n_orig = stream.origins.size();
    const auto n_mod = stream.models.size();
    if (stream.levels.rows() != static_cast<Eigen::Index>(n_orig) ||
        stream.levels.cols() != static_cast<Eigen::Index>(n_mod) || stream.realized.size() != n_orig) {
        throw DimensionError("horizon stream dimensions do not match");
    }
    auto level = [&](std::size_t o, std::size_t m) {
        return stream.levels(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(m));
    };
    const bool any_screen = std::any_of(variants.begin(), variants.end(), [](PoolVariant v) { return v != PoolVariant::All; });

    std::vector<std::vector<PooledForecast>> out(variants.size());
    for (std::size_t k = 0; k < n_orig; ++k) {
        std::vector<std::size_t> available;
        for (std::size_t m = 0; m < n_mod; ++m) {
            if (std::isfinite(level(k, m))) available.push_back(m);
        }
        if (available.empty()) continue;

        const bool screening = any_screen && k >= static_cast<std::size_t>(spec.warmup);
        std::vector<std::size_t> candidates;
        std::vector<std::size_t> ssm_members;
        std::vector<std::size_t> top2_members;
        bool fallback = false;
        if (screening) {
            std::vector<std::size_t> rows;
            for (std::size_t j = k; j-- > 0 && rows.size() < static_cast<std::size_t>(spec.screen_window);) {
                if (stream.origins[j] + stream.horizon <= stream.origins[k] && std::isfinite(stream.realized[j])) {
                    rows.push_back(j);
                }
            }
            std::reverse(rows.begin(), rows.end());
            if (rows.size() == static_cast<std::size_t>(spec.screen_window)) {
                for (auto m : available) {
                    bool complete = true;
                    for (auto j : rows) complete = complete && std::isfinite(level(j, m));
                    if (complete) candidates.push_back(m);
                }
            }
            if (candidates.size() < 2) {
                fallback = true;
            } else {
                Eigen::MatrixXd losses(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(candidates.size()));
                std::vector<std::string> ids;
                std::vector<YearMonth> dates;
                for (std::size_t i = 0; i < rows.size(); ++i) dates.push_back(stream.origins[rows[i]]);
                for (std::size_t c = 0; c < candidates.size(); ++c) {
                    ids.push_back(stream.models[candidates[c]]);
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                        const double e = level(rows[i], candidates[c]) - stream.realized[rows[i]];
                        losses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = e * e;
                    }
                }
                McsConfig cfg = spec.mcs;
                cfg.alphas = {spec.alpha};
                cfg.seed = derive_seed(spec.mcs.seed, {stable_hash(to_string(stream.metal)),
                                                        static_cast<std::uint64_t>(stream.horizon),
                                                        static_cast<std::uint64_t>(stream.origins[k].index())});
                const auto mcs = mcs_procedure(LossMatrix(stream.horizon, dates, ids, losses), cfg);
                for (std::size_t c = 0; c < candidates.size(); ++c) {
                    if (mcs.p_values[c] >= spec.alpha) ssm_members.push_back(candidates[c]);
                }
                std::vector<double> mse(candidates.size());
                for (std::size_t c = 0; c < candidates.size(); ++c) mse[c] = losses.col(static_cast<Eigen::Index>(c)).mean();
                std::vector<std::size_t> order(candidates.size());
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (mcs.p_values[a] != mcs.p_values[b]) return mcs.p_values[a] > mcs.p_values[b];
                    if (mse[a] != mse[b]) return mse[a] < mse[b];
                    return ids[a] < ids[b];
                });
                top2_members = {candidates[order[0]], candidates[order[1]]};
                std::sort(top2_members.begin(), top2_members.end());
            }
        }

        for (std::size_t v = 0; v < variants.size(); ++v) {
            PooledForecast pf;
            pf.origin = stream.origins[k];
            const std::vector<std::size_t>* members = &available;
            if (variants[v] != PoolVariant::All) {
                pf.warmup = !screening;
                pf.fallback = fallback;
                if (screening && !fallback) members = variants[v] == PoolVariant::SSM ? &ssm_members : &top2_members;
            }
            std::vector<double> values;
            for (auto m : *members) {
                values.push_back(level(k, m));
                pf.members.push_back(stream.models[m]);
            }
            pf.level = hull_mean(values);
            out[v].push_back(std::move(pf));
        }
    }
    return out;
}

std::vector<PooledForecast> pool_stream(const HorizonStream& stream, PoolVariant variant, const PoolingSpec& spec) {
    const PoolVariant one[] = {variant};
    return std::move(pool_streams(stream, one, spec).front());
}

}  // namespace metalcast
