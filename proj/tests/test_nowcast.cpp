#include "metalcast/errors.hpp"
#include "metalcast/fixtures.hpp"
#include "metalcast/nowcast.hpp"
#include "metalcast/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace metalcast;
using metalcast::testing::ar_process;
using metalcast::testing::normal_equations;

namespace {

NowcastModelSpec bayes_spec(NowcastFamily f, std::uint64_t seed, int draws = 2000, int burn = 1000) {
    NowcastModelSpec s;
    s.family = f;
    s.mcmc.draws = draws;
    s.mcmc.burn_in = burn;
    s.mcmc.seed = seed;
    return s;
}

}  // namespace

TEST(RandomWalkDrift, ClosedForm) {
    std::vector<double> flat{5, 5, 5, 5};
    EXPECT_EQ(rwd_forecast(flat, 3), 5.0);
    std::vector<double> line{0, 1, 2, 3};
    EXPECT_DOUBLE_EQ(rwd_forecast(line, 2), 5.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.3, 1.0);
    std::vector<double> rw{0.0};
    for (int i = 1; i < 200; ++i) rw.push_back(rw.back() + z(rng));
    double mean_diff = 0.0;
    for (std::size_t i = 1; i < rw.size(); ++i) mean_diff += rw[i] - rw[i - 1];
    mean_diff /= static_cast<double>(rw.size() - 1);
    for (int h = 1; h <= 3; ++h) EXPECT_NEAR(rwd_forecast(rw, h) - rw.back(), h * mean_diff, 1e-10);

    EXPECT_THROW(rwd_forecast(std::vector<double>{1.0}, 1), InsufficientDataError);
}

TEST(ArOls, MatchesNormalEquations) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        auto y = ar_process(rng, 150, 0.2, 0.4, 1.0);
        const int p = 3;
        auto fit = ar_ols_fit(y, p);
        const auto n = static_cast<Eigen::Index>(y.size() - p);
        Eigen::MatrixXd X(n, p + 1);
        Eigen::VectorXd target(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            X(r, 0) = 1.0;
            for (int i = 1; i <= p; ++i) X(r, i) = y[static_cast<std::size_t>(r + p - i)];
            target(r) = y[static_cast<std::size_t>(r + p)];
        }
        auto b = normal_equations(X, target);
        EXPECT_NEAR(fit.intercept, b[0], 1e-8);
        for (int i = 0; i < p; ++i) EXPECT_NEAR(fit.coefs[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i + 1)], 1e-8);
        // One-step forecast is the fitted regression evaluated at the last lags.
        double f = b[0];
        for (int i = 1; i <= p; ++i) f += b[static_cast<std::size_t>(i)] * y[y.size() - static_cast<std::size_t>(i)];
        EXPECT_NEAR(fit.forecast_path(y, 1)[0], f, 1e-8);
    }
}

TEST(ArOls, NoiselessRecovery) {
    std::vector<double> y{1.0};
    for (int i = 0; i < 30; ++i) y.push_back(0.5 * y.back());
    auto fit = ar_ols_fit(y, 1);
    EXPECT_NEAR(fit.coefs[0], 0.5, 1e-8);
    EXPECT_NEAR(fit.intercept, 0.0, 1e-8);
}

TEST(ArOls, WhiteNoiseCoefficientNearZero) {
    int inside = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        auto y = ar_process(rng, 200, 0.0, 0.0, 1.0);
        if (std::abs(ar_ols_fit(y, 1).coefs[0]) < 3.0 / std::sqrt(200.0)) ++inside;
    }
    EXPECT_GE(inside, 95);
}

TEST(ArOls, ShortOrSingularInput) {
    EXPECT_THROW(ar_ols_fit(std::vector<double>(10, 1.0), 1), InsufficientDataError);
    EXPECT_THROW(ar_ols_fit(std::vector<double>(20, 1.0), 1), RankError);
}

TEST(AicSelection, RecoversAr2) {
    // AIC never underfits a strong AR(2) and adds a spurious third lag with the
    // asymptotic probability P(chi2(1) > 2) = 0.1573.
    const int seeds = 400;
    int twos = 0, threes = 0, wide_twos = 0;
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> z;
        std::vector<double> y{0.0, 0.0};
        for (int t = 0; t < 500; ++t) y.push_back(1.2 * y[y.size() - 1] - 0.5 * y[y.size() - 2] + z(rng));
        const int p = select_lag_aic(y, 3);
        EXPECT_GE(p, 2);
        twos += p == 2;
        threes += p == 3;
        wide_twos += select_lag_aic(y, 6) == 2;
    }
    EXPECT_NEAR(static_cast<double>(threes) / seeds, 0.1573, 0.05);
    EXPECT_GT(twos, threes);
    EXPECT_GT(wide_twos, seeds / 2);
}

TEST(AicSelection, WhiteNoisePrefersOneLag) {
    int ones = 0;
    for (int seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        auto y = ar_process(rng, 200, 0.0, 0.0, 1.0);
        if (select_lag_aic(y, 4) == 1) ++ones;
        EXPECT_EQ(select_lag_aic(y, 1), 1);
    }
    EXPECT_GT(ones, 25);
}

TEST(BayesAr, FlatPriorMeanMatchesOls) {
    std::mt19937_64 rng(5);
    auto y = ar_process(rng, 240, 0.5, 0.6, 1.0);
    auto spec = bayes_spec(NowcastFamily::BAR, 77);
    spec.mcmc.prior_coef_var = 1e10;
    auto post = bar_posterior(y, spec);
    auto ols = ar_ols_fit(y, 1);
    const double draws = spec.mcmc.draws;
    EXPECT_LE(std::abs(post.coef_mean(0) - ols.intercept), 3.0 * post.coef_sd(0) / std::sqrt(draws));
    EXPECT_LE(std::abs(post.coef_mean(1) - ols.coefs[0]), 3.0 * post.coef_sd(1) / std::sqrt(draws));
}

TEST(BayesAr, ConstantSeriesAndDeterminism) {
    std::vector<double> flat(40, 3.25);
    for (auto f : {NowcastFamily::BAR, NowcastFamily::BARSV, NowcastFamily::BARSVO}) {
        auto post = nowcast_path(flat, bayes_spec(f, 1, 300, 100), 3, 1);
        for (double v : post) EXPECT_NEAR(v, 3.25, 1e-6);
    }
    std::mt19937_64 rng(9);
    auto y = ar_process(rng, 120, 0.1, 0.5, 1.0);
    for (auto f : {NowcastFamily::BAR, NowcastFamily::BARSV, NowcastFamily::BARSVO}) {
        auto spec = bayes_spec(f, 0, 400, 200);
        EXPECT_EQ(nowcast_path(y, spec, 3, 42), nowcast_path(y, spec, 3, 42));
        EXPECT_NE(nowcast_path(y, spec, 3, 42), nowcast_path(y, spec, 3, 43));
    }
}

TEST(BayesAr, StochasticVolatilityTracksBreak) {
    int up = 0;
    for (int seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(500 + static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> z;
        std::vector<double> y{0.0};
        for (int t = 1; t < 200; ++t) y.push_back(0.5 * y.back() + (t < 100 ? 1.0 : 2.0) * z(rng));
        auto post = bar_sv_posterior(y, bayes_spec(NowcastFamily::BARSV, static_cast<std::uint64_t>(seed), 1000, 500));
        ASSERT_EQ(post.log_vol_mean.size(), y.size() - 1);
        if (post.log_vol_mean.back() > post.log_vol_mean.front()) ++up;
    }
    EXPECT_GE(up, 9);
}

TEST(BayesAr, OutlierIsFlagged) {
    std::mt19937_64 rng(21);
    auto y = ar_process(rng, 150, 0.0, 0.5, 1.0);
    y[90] += 10.0;
    auto post = bar_svo_posterior(y, bayes_spec(NowcastFamily::BARSVO, 8, 1000, 500));
    ASSERT_EQ(post.outlier_prob.size(), y.size() - 1);
    const auto top = std::max_element(post.outlier_prob.begin(), post.outlier_prob.end()) - post.outlier_prob.begin();
    EXPECT_EQ(top + 1, 90);

    auto clean = ar_process(rng, 150, 0.0, 0.5, 1.0);
    auto calm = bar_svo_posterior(clean, bayes_spec(NowcastFamily::BARSVO, 8, 1000, 500));
    double avg = 0.0;
    for (double p : calm.outlier_prob) avg += p;
    EXPECT_LT(avg / static_cast<double>(calm.outlier_prob.size()), 0.2);
}

TEST(BayesAr, InvalidSpec) {
    auto spec = bayes_spec(NowcastFamily::BAR, 1, 100, 100);
    EXPECT_THROW(spec.validate(), ConfigError);
    NowcastModelSpec ar;
    ar.family = NowcastFamily::AR;
    ar.max_lag = 0;
    EXPECT_THROW(ar.validate(), ConfigError);
    EXPECT_THROW(parse_nowcast_family("ARMA"), ConfigError);
}

TEST(FillMissingTail, FixtureUsesRandomWalkDrift) {
    RealTimePanel panel;
    panel.add(ip_fixture_meta(), parse_vintage_csv(ip_vintage_fixture_csv(), ip_fixture_meta()));
    const YearMonth as_of{2012, 1};
    auto snap = fill_missing_tail(panel, as_of, NowcastModelSpec{});
    const auto& vintage = panel.vintage_at("IP", as_of).data;
    const auto& filled = snap.series.at("IP");
    EXPECT_EQ(snap.filled.at("IP"), 2);
    EXPECT_EQ(filled.last(), as_of);
    for (std::size_t i = 0; i < vintage.size(); ++i) EXPECT_EQ(filled.values[i], vintage.values[i]);

    double drift = 0.0;
    for (std::size_t i = 1; i < vintage.size(); ++i) drift += vintage.values[i] - vintage.values[i - 1];
    drift /= static_cast<double>(vintage.size() - 1);
    EXPECT_NEAR(filled.at({2011, 12}), 155.94 + drift, 1e-9);
    EXPECT_NEAR(filled.at({2012, 1}), 155.94 + 2 * drift, 1e-9);
}

TEST(FillMissingTail, CompleteSeriesIsUnchanged) {
    MonthlySeries s{{2000, 1}, std::vector<double>(30, 1.0)};
    for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = 1.0 + 0.1 * static_cast<double>(i * i % 7);
    SeriesMeta a;
    a.id = "A";
    SeriesMeta b;
    b.id = "B";
    b.publication_lag = 3;
    RealTimePanel panel;
    panel.add(a, vintages_from_series(s, 0, {2002, 1}, {2002, 6}));
    panel.add(b, vintages_from_series(s, 3, {2002, 1}, {2002, 6}));
    auto snap = fill_missing_tail(panel, {2002, 6}, NowcastModelSpec{});
    EXPECT_EQ(snap.series.at("A"), panel.vintage_at("A", {2002, 6}).data);
    EXPECT_EQ(snap.filled.at("A"), 0);
    EXPECT_EQ(snap.filled.at("B"), 3);
    EXPECT_EQ(snap.series.at("B").last(), YearMonth(2002, 6));
}

TEST(HorseRace, ArBeatsRandomWalkOnAr1Data) {
    std::vector<NowcastModelSpec> models(2);
    models[1].family = NowcastFamily::AR;
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto panel = ar1_panel(seed, 0.8, 1.0, 300, 1, 150);
        HorseRaceConfig cfg;
        cfg.first_vintage = panel.first_vintage();
        cfg.last_vintage = panel.last_vintage();
        auto report = nowcast_horse_race(panel, models, cfg);
        if (report.find("Y", 1, "AR(1)")->ratio < 1.0) ++wins;
    }
    EXPECT_GE(wins, 8);
}

TEST(HorseRace, ReportLayoutAndSelfRatio) {
    auto panel = ar1_panel(4, 0.8, 1.0, 200, 2, 60);
    std::vector<NowcastModelSpec> models(2);
    HorseRaceConfig cfg;
    cfg.first_vintage = panel.first_vintage();
    cfg.last_vintage = panel.last_vintage();
    auto report = nowcast_horse_race(panel, models, cfg);
    EXPECT_EQ(report.max_horizon, 2);
    for (int h = 1; h <= 2; ++h) {
        const auto* rw = report.find("Y", h, "RW-D");
        ASSERT_NE(rw, nullptr);
        EXPECT_EQ(rw->ratio, 1.0);
        EXPECT_GT(rw->rmsfe, 0.0);
    }
    auto csv = report.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "ID,Horizon,RW-D,RW-D");
    EXPECT_NE(report.to_json().find("\"cells\""), std::string::npos);

    std::vector<NowcastModelSpec> bad(1);
    bad[0].family = NowcastFamily::AR;
    EXPECT_THROW(nowcast_horse_race(panel, bad, cfg), ConfigError);
}
