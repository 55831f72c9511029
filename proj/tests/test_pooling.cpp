#include "metalcast/errors.hpp"
#include "metalcast/pooling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace metalcast;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PoolingSpec small_spec(std::uint64_t seed = 11) {
    PoolingSpec s;
    s.warmup = 12;
    s.screen_window = 12;
    s.alpha = 0.25;
    s.mcs.replications = 300;
    s.mcs.block = 3;
    s.mcs.seed = seed;
    return s;
}

// Random-walk truth; model j forecasts truth plus noise with scale sd[j].
HorizonStream noisy_stream(std::uint64_t seed, int n, int h, const std::vector<double>& sd) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    HorizonStream s;
    s.horizon = h;
    s.levels.resize(n, static_cast<Eigen::Index>(sd.size()));
    double truth = 100.0;
    for (int k = 0; k < n; ++k) {
        s.origins.push_back(YearMonth(2012, 1) + k);
        truth += z(rng);
        s.realized.push_back(truth);
        for (std::size_t j = 0; j < sd.size(); ++j) s.levels(k, static_cast<Eigen::Index>(j)) = truth + sd[j] * z(rng);
    }
    for (std::size_t j = 0; j < sd.size(); ++j) s.models.push_back("m" + std::to_string(j));
    return s;
}

constexpr PoolVariant kAll[] = {PoolVariant::All, PoolVariant::SSM, PoolVariant::Top2};

}  // namespace

TEST(PoolAverage, MatchesDirectMean) {
    const double one[] = {100.0};
    EXPECT_EQ(pool_average(one), 100.0);
    const double two[] = {90.0, 110.0};
    EXPECT_EQ(pool_average(two), 100.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> v(1 + rep % 9);
        long double sum = 0.0L;
        for (auto& x : v) {
            x = u(rng);
            sum += x;
        }
        EXPECT_NEAR(pool_average(v), static_cast<double>(sum / v.size()), 1e-12);
    }
    EXPECT_THROW(pool_average(std::span<const double>{}), EmptySampleError);
}

TEST(PoolingSpec, ValidatesAndNamesVariants) {
    EXPECT_NO_THROW(PoolingSpec{}.validate());
    PoolingSpec s;
    s.warmup = 6;
    EXPECT_THROW(s.validate(), ConfigError);
    s = PoolingSpec{};
    s.screen_window = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = PoolingSpec{};
    s.alpha = 1.0;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_EQ(pool_id(PoolVariant::All), "pool_all");
    EXPECT_EQ(pool_id(PoolVariant::SSM), "pool_ssm25");
    EXPECT_EQ(pool_id(PoolVariant::Top2), "pool_top2");
}

TEST(Pooling, IdenticalModelsPoolToTheCommonForecast) {
    auto s = noisy_stream(5, 40, 1, {1.0});
    s.models = {"a", "b", "c"};
    Eigen::VectorXd col = s.levels.col(0);
    s.levels.resize(40, 3);
    for (int j = 0; j < 3; ++j) s.levels.col(j) = col;
    const auto pooled = pool_streams(s, kAll, small_spec());
    for (const auto& variant : pooled) {
        ASSERT_EQ(variant.size(), 40u);
        for (std::size_t k = 0; k < variant.size(); ++k) EXPECT_EQ(variant[k].level, col(static_cast<Eigen::Index>(k)));
    }
}

TEST(Pooling, JensenBoundAndConvexHullHoldAtEveryOrigin) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = noisy_stream(seed, 60, 3, {0.5, 1.0, 2.0, 4.0});
        const auto pooled = pool_streams(s, kAll, small_spec(seed));
        for (const auto& variant : pooled) {
            for (std::size_t k = 0; k < variant.size(); ++k) {
                const auto& pf = variant[k];
                ASSERT_FALSE(pf.members.empty());
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                double mean_se = 0.0;
                for (const auto& id : pf.members) {
                    const auto j = std::find(s.models.begin(), s.models.end(), id) - s.models.begin();
                    const double x = s.levels(static_cast<Eigen::Index>(k), j);
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                    mean_se += (x - s.realized[k]) * (x - s.realized[k]);
                }
                mean_se /= static_cast<double>(pf.members.size());
                EXPECT_GE(pf.level, lo);
                EXPECT_LE(pf.level, hi);
                const double e = pf.level - s.realized[k];
                EXPECT_LE(e * e, mean_se);
            }
        }
    }
}

TEST(Pooling, WarmupUsesEveryAvailableModel) {
    auto s = noisy_stream(8, 30, 1, {1.0, 2.0, 3.0});
    s.levels(4, 1) = kNaN;
    const auto spec = small_spec();
    const auto pooled = pool_streams(s, kAll, spec);
    for (std::size_t v = 0; v < 3; ++v) {
        for (std::size_t k = 0; k < pooled[v].size(); ++k) {
            const auto& pf = pooled[v][k];
            const bool in_warmup = static_cast<int>(k) < spec.warmup;
            EXPECT_EQ(pf.warmup, kAll[v] != PoolVariant::All && in_warmup);
            if (kAll[v] == PoolVariant::All || in_warmup) {
                EXPECT_EQ(pf.members.size(), k == 4 ? 2u : 3u);
            }
        }
    }
    EXPECT_EQ(pooled[0][4].members, (std::vector<std::string>{"m0", "m2"}));
}

TEST(Pooling, ScreenIgnoresOutcomesNotYetRealized) {
    const int h = 3;
    const auto base = noisy_stream(21, 50, h, {0.5, 1.0, 1.5, 3.0});
    const auto spec = small_spec(4);
    const auto reference = pool_streams(base, kAll, spec);
    for (int k = spec.warmup; k < 50; k += 5) {
        // Outcomes of origins later than T - h, and every forecast after T,
        // are unknown at T.
        auto altered = base;
        for (int j = k - h + 1; j < 50; ++j) altered.realized[j] += 1000.0 * (j % 2 ? 1.0 : -1.0);
        for (int j = k + 1; j < 50; ++j) altered.levels.row(j).array() += 500.0;
        const auto pooled = pool_streams(altered, kAll, spec);
        for (std::size_t v = 0; v < 3; ++v) {
            EXPECT_EQ(pooled[v][k].level, reference[v][k].level) << "origin " << k;
            EXPECT_EQ(pooled[v][k].members, reference[v][k].members) << "origin " << k;
        }
    }
}

TEST(Pooling, TopTwoKeepsTheDominantModel) {
    int hits = 0;
    int total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = noisy_stream(100 + seed, 48, 1, {0.2, 2.0, 2.0, 2.5});
        const auto spec = small_spec(seed);
        const auto top2 = pool_stream(s, PoolVariant::Top2, spec);
        for (std::size_t k = static_cast<std::size_t>(spec.warmup); k < top2.size(); ++k) {
            ASSERT_FALSE(top2[k].fallback);
            ASSERT_EQ(top2[k].members.size(), 2u);
            ++total;
            hits += std::find(top2[k].members.begin(), top2[k].members.end(), "m0") != top2[k].members.end();
        }
    }
    EXPECT_GE(hits, total * 9 / 10);
}

TEST(Pooling, FallsBackWhenFewerThanTwoCandidates) {
    auto s = noisy_stream(6, 30, 1, {1.0, 2.0});
    // Model m1 misses one origin inside every screen window from origin 13 to 24.
    s.levels(12, 1) = kNaN;
    const auto spec = small_spec();
    const auto ssm = pool_stream(s, PoolVariant::SSM, spec);
    const auto top2 = pool_stream(s, PoolVariant::Top2, spec);
    for (std::size_t k = 13; k <= 24; ++k) {
        EXPECT_TRUE(ssm[k].fallback) << k;
        EXPECT_TRUE(top2[k].fallback) << k;
        EXPECT_EQ(ssm[k].members.size(), 2u);
        EXPECT_EQ(ssm[k].level, pool_average(std::vector<double>{s.levels(static_cast<Eigen::Index>(k), 0),
                                                                  s.levels(static_cast<Eigen::Index>(k), 1)}));
    }
    EXPECT_FALSE(ssm[25].fallback);

    auto single = noisy_stream(6, 30, 1, {1.0});
    const auto lone = pool_stream(single, PoolVariant::Top2, spec);
    for (std::size_t k = 12; k < lone.size(); ++k) {
        EXPECT_TRUE(lone[k].fallback);
        EXPECT_EQ(lone[k].level, single.levels(static_cast<Eigen::Index>(k), 0));
    }
}

TEST(Pooling, SharedScreenMatchesSingleVariantRunsAndIsDeterministic) {
    const auto s = noisy_stream(31, 50, 2, {0.7, 1.0, 1.1, 2.0, 2.5});
    const auto spec = small_spec(77);
    const auto joint = pool_streams(s, kAll, spec);
    for (std::size_t v = 0; v < 3; ++v) {
        const auto single = pool_stream(s, kAll[v], spec);
        ASSERT_EQ(single.size(), joint[v].size());
        for (std::size_t k = 0; k < single.size(); ++k) {
            EXPECT_EQ(single[k].level, joint[v][k].level);
            EXPECT_EQ(single[k].members, joint[v][k].members);
        }
    }
    auto parallel = spec;
    parallel.mcs.workers = 4;
    const auto again = pool_streams(s, kAll, parallel);
    for (std::size_t v = 0; v < 3; ++v)
        for (std::size_t k = 0; k < again[v].size(); ++k) EXPECT_EQ(again[v][k].level, joint[v][k].level);
}

TEST(Pooling, SkipsOriginsWithoutForecastsAndChecksDimensions) {
    auto s = noisy_stream(2, 20, 1, {1.0, 1.0});
    s.levels.row(3).setConstant(kNaN);
    const auto all = pool_stream(s, PoolVariant::All, small_spec());
    ASSERT_EQ(all.size(), 19u);
    EXPECT_EQ(all[3].origin, s.origins[4]);
    s.realized.pop_back();
    EXPECT_THROW(pool_stream(s, PoolVariant::All, small_spec()), DimensionError);
}
