#include "metalcast/config.hpp"
#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"
#include "metalcast/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

using namespace metalcast;
using metalcast::testing::TempDir;

namespace {

const char* kMinimal =
    "[run]\n"
    "manifest = data/manifest.ini\n"
    "metals = Copper\n"
    "horizons = 1-3, 12\n"
    "seed = 42\n"
    "[model:RW-D]\n"
    "family = RWD\n";

BacktestConfig minimal() { return parse_config(kMinimal, "/cfg"); }

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST(IntList, ParsesRangesAndItems) {
    EXPECT_EQ(parse_int_list("1-3,12"), (std::vector<int>{1, 2, 3, 12}));
    EXPECT_EQ(parse_int_list("1, 3, 6"), (std::vector<int>{1, 3, 6}));
    EXPECT_EQ(parse_int_list("1-24").size(), 24u);
    EXPECT_THROW(parse_int_list("5-2"), ConfigError);
    EXPECT_THROW(parse_int_list("1,x"), ConfigError);
}

TEST(Config, ParsesEverySection) {
    const auto c = parse_config(
        "[run]\n"
        "manifest = manifest.ini\n"
        "metals = Copper, Zinc\n"
        "horizons = 1,3\n"
        "window = 120\n"
        "first_origin = 2015-01\n"
        "last_origin = 2016-12\n"
        "base_month = 2010-06\n"
        "seed = 7\n"
        "out = results\n"
        "workers = 3\n"
        "table_horizons = 1,3\n"
        "[nowcast]\n"
        "fill_model = BARSVO\n"
        "draws = 300\n"
        "burn_in = 100\n"
        "window = 96\n"
        "horse_race = true\n"
        "race_models = RWD, AR\n"
        "race_variables = IP\n"
        "[evaluation]\n"
        "dm_variance = HLN\n"
        "mcs_replications = 500\n"
        "mcs_block = 4\n"
        "mcs_alphas = 0.05, 0.25\n"
        "mcs_statistic = TRange\n"
        "cumpath_skip = 6\n"
        "[pooling]\n"
        "enabled = false\n"
        "warmup = 18\n"
        "screen_window = 10\n"
        "alpha = 0.1\n"
        "[model_free]\n"
        "futures = false\n"
        "survey = true\n"
        "survey_deflate = false\n"
        "[model:RW-D]\n"
        "family = RWD\n"
        "[model:ARDL-AIC]\n"
        "family = ARDL\n"
        "p = AIC\n"
        "p_max = 3\n"
        "s = 2\n"
        "predictors = IP, EcAct\n"
        "restricted = true\n"
        "[model:FAVAR]\n"
        "family = FAVAR\n"
        "r = 2\n"
        "endogenous = price, NO-M\n"
        "iterated = true\n"
        "factor_divide_by_n = false\n",
        "/base");
    EXPECT_EQ(c.manifest, "/base/manifest.ini");
    EXPECT_EQ(c.metals, (std::vector<Metal>{Metal::Copper, Metal::Zinc}));
    EXPECT_EQ(c.horizons, (std::vector<int>{1, 3}));
    EXPECT_EQ(c.window, 120u);
    EXPECT_EQ(c.first_origin, YearMonth(2015, 1));
    EXPECT_EQ(c.last_origin, YearMonth(2016, 12));
    EXPECT_EQ(c.base_month, YearMonth(2010, 6));
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.out_dir, "/base/results");
    EXPECT_EQ(c.workers, 3);
    EXPECT_EQ(c.table_horizons, (std::vector<int>{1, 3}));

    EXPECT_EQ(c.nowcast.family, NowcastFamily::BARSVO);
    EXPECT_EQ(c.nowcast.mcmc.draws, 300);
    EXPECT_EQ(c.nowcast.mcmc.burn_in, 100);
    EXPECT_EQ(c.nowcast_window, 96u);
    EXPECT_TRUE(c.horse_race);
    ASSERT_EQ(c.race_models.size(), 2u);
    EXPECT_EQ(c.race_models[1].family, NowcastFamily::AR);
    EXPECT_EQ(c.race_variables, (std::vector<std::string>{"IP"}));

    EXPECT_EQ(c.dm.variance, DmVariance::Hln);
    EXPECT_EQ(c.mcs.replications, 500);
    EXPECT_EQ(c.mcs.block, 4);
    EXPECT_EQ(c.mcs.alphas, (std::vector<double>{0.05, 0.25}));
    EXPECT_EQ(c.mcs.statistic, McsStatistic::TRange);
    EXPECT_EQ(c.cumpath_skip, 6u);

    EXPECT_FALSE(c.pooling);
    EXPECT_EQ(c.pooling_spec.warmup, 18);
    EXPECT_EQ(c.pooling_spec.screen_window, 10);
    EXPECT_EQ(c.pooling_spec.alpha, 0.1);
    EXPECT_EQ(c.pooling_spec.mcs.replications, 500);

    EXPECT_FALSE(c.futures);
    EXPECT_TRUE(c.survey);
    EXPECT_FALSE(c.survey_deflate);

    ASSERT_EQ(c.models.size(), 3u);
    const auto& ardl = c.models[1];
    EXPECT_EQ(ardl.id, "ARDL-AIC");
    EXPECT_EQ(ardl.family, ModelFamily::ARDL);
    EXPECT_TRUE(ardl.p.aic);
    EXPECT_EQ(ardl.p.max, 3);
    EXPECT_FALSE(ardl.s.aic);
    EXPECT_EQ(ardl.s.value, 2);
    EXPECT_EQ(ardl.predictors, (std::vector<std::string>{"IP", "EcAct"}));
    EXPECT_TRUE(ardl.restricted);
    const auto& favar = c.models[2];
    EXPECT_EQ(favar.r, 2);
    EXPECT_EQ(favar.endogenous, (std::vector<std::string>{"price", "NO-M"}));
    EXPECT_TRUE(favar.iterated);
    EXPECT_FALSE(favar.factor_options.divide_by_n);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, DefaultsAndDeterministicRuns) {
    auto c = parse_config(
        "[run]\nmanifest = m.ini\n[pooling]\nenabled = false\n[model:RW-D]\nfamily = RWD\n");
    EXPECT_EQ(c.horizons.size(), 24u);
    EXPECT_EQ(c.metals.size(), 4u);
    EXPECT_EQ(c.window, 184u);
    EXPECT_EQ(c.nowcast.family, NowcastFamily::RWD);
    EXPECT_EQ(c.mcs.replications, 10000);
    EXPECT_EQ(c.max_horizon(), 24);
    // A lone RW-D model with an RWD fill draws no random numbers.
    EXPECT_FALSE(c.stochastic());
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsInvalidRuns) {
    auto c = minimal();
    EXPECT_NO_THROW(c.validate());

    c.horizons = {1, 25};
    EXPECT_THROW(c.validate(), ConfigError);
    c = minimal();
    c.horizons = {0};
    EXPECT_THROW(c.validate(), ConfigError);

    c = minimal();
    c.seed.reset();
    EXPECT_THROW(c.validate(), ConfigError);

    for (const char* id : {"pool_all", "Futures", "Survey"}) {
        c = minimal();
        c.models.push_back(c.models.front());
        c.models.back().id = id;
        EXPECT_THROW(c.validate(), ConfigError) << id;
    }

    c = minimal();
    c.models.push_back(c.models.front());
    EXPECT_THROW(c.validate(), ConfigError);

    c = minimal();
    c.models.front().family = ModelFamily::AR;
    EXPECT_THROW(c.validate(), ConfigError);

    c = minimal();
    c.window = 12;
    EXPECT_THROW(c.validate(), ConfigError);

    c = minimal();
    c.first_origin = YearMonth(2016, 1);
    c.last_origin = YearMonth(2015, 1);
    EXPECT_THROW(c.validate(), ConfigError);

    c = minimal();
    c.workers = 0;
    EXPECT_THROW(c.validate(), ConfigError);

    c = minimal();
    c.pooling_spec.screen_window = 10;
    c.pooling_spec.mcs.block = 6;
    EXPECT_THROW(c.validate(), ConfigError);

    c = minimal();
    c.mcs.alphas = {1.5};
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, RejectsMalformedText) {
    EXPECT_THROW(parse_config("[bogus]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nwindow = ten\n"), ConfigError);
    EXPECT_THROW(parse_config("[evaluation]\ndm_variance = Newey\n"), ConfigError);
    EXPECT_THROW(parse_config("[evaluation]\nmcs_statistic = TMean\n"), ConfigError);
    EXPECT_THROW(parse_config("[pooling]\nenabled = maybe\n"), ConfigError);
    EXPECT_THROW(parse_config("[model:X]\nfamily = GARCH\n"), ConfigError);
    EXPECT_THROW(parse_config("[run\nmanifest = a\n"), ConfigError);
}

TEST(Manifest, ParsesSectionsAndResolvesPaths) {
    TempDir dir("manifest");
    write_file(dir.path() / "manifest.ini",
               "[panel]\n"
               "first_vintage = 2010-01\n"
               "[IP]\n"
               "file = IP.csv\n"
               "transform = DLog\n"
               "group = EcAct\n"
               "publication_lag = 2\n"
               "[FX]\n"
               "file = fx.csv\n"
               "layout = series\n"
               "transform = DLog\n"
               "group = ExRates\n"
               "frequency = DailyAveraged\n"
               "[model_free]\n"
               "futures = futures.csv\n"
               "survey_Copper = survey_copper.csv\n");
    const auto m = load_manifest((dir.path() / "manifest.ini").string());
    ASSERT_EQ(m.entries.size(), 2u);
    EXPECT_EQ(m.first_vintage, YearMonth(2010, 1));
    EXPECT_EQ(m.entries[0].meta.id, "IP");
    EXPECT_EQ(m.entries[0].file, (dir.path() / "IP.csv").string());
    EXPECT_EQ(m.entries[0].layout, FileLayout::Vintages);
    EXPECT_EQ(m.entries[0].meta.publication_lag, 2);
    EXPECT_EQ(m.entries[1].layout, FileLayout::Series);
    EXPECT_EQ(m.entries[1].meta.group, Group::ExRates);
    EXPECT_EQ(m.entries[1].meta.source_frequency, SourceFrequency::DailyAveraged);
    EXPECT_EQ(m.futures_file, (dir.path() / "futures.csv").string());
    ASSERT_EQ(m.survey_files.count(Metal::Copper), 1u);

    write_file(dir.path() / "bad.ini", "[IP]\ntransform = DLog\n");
    EXPECT_THROW(load_manifest((dir.path() / "bad.ini").string()), ConfigError);
    write_file(dir.path() / "bad2.ini", "[IP]\nfile = a.csv\nlayout = wide\n");
    EXPECT_THROW(load_manifest((dir.path() / "bad2.ini").string()), ConfigError);
    write_file(dir.path() / "bad3.ini", "[panel]\nfirst_vintage = 2010-01\n");
    EXPECT_THROW(load_manifest((dir.path() / "bad3.ini").string()), ConfigError);
}

TEST(Manifest, SyntheticFilesLoadBackIntoTheSamePanel) {
    TempDir dir("synth_config");
    SynthSpec spec;
    const auto data = generate_synth(spec);
    write_synth(spec, data, dir.str(), 99);

    const auto manifest = load_manifest((dir.path() / "manifest.ini").string());
    const auto loaded = load_panel(manifest);
    const auto direct = synth_panel(spec, data);
    ASSERT_EQ(loaded.ids().size(), direct.ids().size());
    for (const auto& id : direct.ids()) {
        ASSERT_TRUE(loaded.has(id)) << id;
        const auto& a = loaded.first_release(id);
        const auto& b = direct.first_release(id);
        ASSERT_EQ(a.start, b.start) << id;
        ASSERT_EQ(a.size(), b.size()) << id;
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_NEAR(a.values[i], b.values[i], 1e-9 * std::max(1.0, std::abs(b.values[i]))) << id << " " << i;
        }
        EXPECT_EQ(loaded.meta(id).transform, direct.meta(id).transform) << id;
        EXPECT_EQ(loaded.meta(id).publication_lag, direct.meta(id).publication_lag) << id;
    }

    const auto mf = load_model_free(manifest);
    // Two daily quotes per month collapse to their monthly average.
    ASSERT_EQ(mf.futures.size() * 2, data.futures.size());
    for (const auto& q : mf.futures) {
        double sum = 0.0;
        int n = 0;
        for (const auto& d : data.futures) {
            if (d.metal == q.metal && d.quote_date == q.quote_date && d.maturity == q.maturity) {
                sum += d.price;
                ++n;
            }
        }
        ASSERT_EQ(n, 2);
        EXPECT_NEAR(q.price, sum / 2.0, 1e-9 * q.price);
    }
    EXPECT_EQ(mf.surveys.size(), data.surveys.size());

    const auto config = load_config((dir.path() / "backtest.ini").string());
    EXPECT_NO_THROW(config.validate());
    EXPECT_EQ(config.seed, 99u);
    EXPECT_EQ(config.manifest, (dir.path() / "manifest.ini").string());
    EXPECT_TRUE(config.stochastic());
}
