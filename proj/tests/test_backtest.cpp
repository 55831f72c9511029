#include "metalcast/backtest.hpp"
#include "metalcast/config.hpp"
#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"
#include "metalcast/report.hpp"
#include "metalcast/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <tuple>

using namespace metalcast;
using metalcast::testing::TempDir;

namespace {

struct Fixture {
    std::unique_ptr<TempDir> dir;
    BacktestConfig config;
    RealTimePanel panel;
    ModelFreeData model_free;
    BacktestReport report;
};

BacktestConfig small_config(const std::string& dir) {
    auto c = load_config(dir + "/backtest.ini");
    c.metals = {Metal::Copper, Metal::Nickel};
    c.horizons = {1, 3, 6};
    c.table_horizons = {1, 3, 6};
    c.last_origin = *c.first_origin + 29;
    c.nowcast.family = NowcastFamily::RWD;
    c.mcs.replications = 200;
    c.pooling_spec.mcs = c.mcs;
    std::vector<ModelSpec> keep;
    for (const auto& m : c.models) {
        if (m.id == "RW-D" || m.id == "AR1" || m.id == "ARDL-IP" || m.id == "ARDI-1F") keep.push_back(m);
    }
    c.models = keep;
    c.cumpath_skip = 3;
    return c;
}

const Fixture& fixture() {
    static const std::unique_ptr<Fixture> f = [] {
        auto out = std::make_unique<Fixture>();
        out->dir = std::make_unique<TempDir>("backtest");
        SynthSpec spec;
        const auto data = generate_synth(spec);
        write_synth(spec, data, out->dir->str(), 5);
        out->config = small_config(out->dir->str());
        const auto manifest = load_manifest(out->config.manifest);
        out->panel = load_panel(manifest);
        out->model_free = load_model_free(manifest);
        out->report = run_backtest(out->config, out->panel, out->model_free);
        return out;
    }();
    return *f;
}

bool is_pool(const std::string& id) { return id.rfind("pool_", 0) == 0; }

double rmspe_ratio(const std::vector<ForecastRecord>& f, Metal metal, int h, const std::string& model,
                   const std::string& bench) {
    std::map<YearMonth, double> a;
    std::map<YearMonth, double> b;
    for (const auto& r : f) {
        if (r.metal != metal || r.horizon != h || !r.realized) continue;
        const double e = r.level - *r.realized;
        if (r.model == model) a[r.origin] = e * e;
        if (r.model == bench) b[r.origin] = e * e;
    }
    long double sa = 0.0L;
    long double sb = 0.0L;
    for (const auto& [d, l] : a) {
        if (!b.count(d)) continue;
        sa += l;
        sb += b.at(d);
    }
    return std::sqrt(static_cast<double>(sa / sb));
}

}  // namespace

TEST(Backtest, ForecastsAndErrorsPartitionTheGrid) {
    const auto& f = fixture();
    const auto& r = f.report;
    ASSERT_EQ(r.origins.size(), 30u);
    EXPECT_EQ(r.benchmark, "RW-D");

    std::map<std::tuple<Metal, std::string, YearMonth, int>, int> seen;
    for (const auto& x : r.forecasts) {
        if (!is_pool(x.model)) ++seen[{x.metal, x.model, x.origin, x.horizon}];
    }
    for (const auto& e : r.errors) ++seen[{e.metal, e.model, e.origin, e.horizon}];

    std::size_t expected = 0;
    for (auto metal : f.config.metals) {
        for (const auto& origin : r.origins) {
            for (int h : f.config.horizons) {
                std::vector<std::string> ids;
                for (const auto& m : f.config.models) ids.push_back(m.id);
                if (h == 3) ids.push_back(kFuturesId);
                if (h == 6) ids.push_back(kSurveyId);
                for (const auto& id : ids) {
                    ++expected;
                    auto it = seen.find({metal, id, origin, h});
                    ASSERT_NE(it, seen.end()) << id << " " << origin.str() << " h" << h;
                    EXPECT_EQ(it->second, 1) << id << " " << origin.str() << " h" << h;
                }
            }
        }
    }
    EXPECT_EQ(seen.size(), expected);
    // The benchmark never fails on a complete panel.
    for (const auto& e : r.errors) EXPECT_NE(e.model, "RW-D") << e.message;
}

TEST(Backtest, ForecastRecordsAreConsistent) {
    const auto& r = fixture().report;
    for (const auto& x : r.forecasts) {
        ASSERT_GT(x.level, 0.0);
        ASSERT_GT(x.origin_price, 0.0);
        if (is_pool(x.model) || x.model == kFuturesId || x.model == kSurveyId) {
            EXPECT_NEAR(x.growth, std::log(x.level / x.origin_price) / x.horizon, 1e-12);
        }
        if (x.origin + x.horizon <= r.origins.back()) {
            EXPECT_TRUE(x.realized.has_value());
        }
    }
    // Sorted by metal, then model in column order, then origin and horizon.
    const auto& ev = r.evaluation(Metal::Copper);
    auto column = [&](const std::string& id) { return std::find(ev.models.begin(), ev.models.end(), id) - ev.models.begin(); };
    for (std::size_t i = 1; i < r.forecasts.size(); ++i) {
        const auto& a = r.forecasts[i - 1];
        const auto& b = r.forecasts[i];
        const auto ka = std::make_tuple(a.metal, column(a.model), a.origin, a.horizon);
        const auto kb = std::make_tuple(b.metal, column(b.model), b.origin, b.horizon);
        ASSERT_LT(ka, kb) << i;
    }
}

TEST(Backtest, RatiosMatchForecastErrors) {
    const auto& f = fixture();
    for (auto metal : f.config.metals) {
        const auto& ev = f.report.evaluation(metal);
        ASSERT_EQ(ev.models.front(), "RW-D");
        for (int h : f.config.horizons) {
            for (const auto& cell : ev.ratios.at(h)) {
                if (cell.is_benchmark) {
                    std::vector<double> e;
                    for (const auto& x : f.report.forecasts)
                        if (x.metal == metal && x.horizon == h && x.model == "RW-D" && x.realized)
                            e.push_back(x.level - *x.realized);
                    EXPECT_NEAR(cell.value, rmsfe(e), 1e-9 * cell.value);
                } else if (cell.n == 0) {
                    // Model-free ids only exist at their own horizons.
                    EXPECT_TRUE(cell.model == kFuturesId || cell.model == kSurveyId) << cell.model;
                    EXPECT_TRUE(std::isnan(cell.value));
                } else {
                    EXPECT_NEAR(cell.value, rmspe_ratio(f.report.forecasts, metal, h, cell.model, "RW-D"), 1e-9)
                        << cell.model << " h" << h;
                }
            }
        }
    }
}

TEST(Backtest, PoolsRespectJensenAndTheConvexHull) {
    const auto& r = fixture().report;
    std::map<std::tuple<Metal, std::string, YearMonth, int>, double> level;
    for (const auto& x : r.forecasts) level[{x.metal, x.model, x.origin, x.horizon}] = x.level;
    std::map<std::tuple<Metal, YearMonth, int>, double> truth;
    for (const auto& x : r.forecasts)
        if (x.realized) truth[{x.metal, x.origin, x.horizon}] = *x.realized;

    ASSERT_FALSE(r.pools.empty());
    std::size_t checked = 0;
    for (const auto& p : r.pools) {
        double lo = INFINITY;
        double hi = -INFINITY;
        double mean_se = 0.0;
        auto y = truth.find({p.metal, p.forecast.origin, p.horizon});
        for (const auto& id : p.forecast.members) {
            const double x = level.at({p.metal, id, p.forecast.origin, p.horizon});
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            if (y != truth.end()) mean_se += (x - y->second) * (x - y->second);
        }
        EXPECT_GE(p.forecast.level, lo);
        EXPECT_LE(p.forecast.level, hi);
        EXPECT_EQ(level.at({p.metal, pool_id(p.variant), p.forecast.origin, p.horizon}), p.forecast.level);
        if (y == truth.end()) continue;
        mean_se /= static_cast<double>(p.forecast.members.size());
        const double e = p.forecast.level - y->second;
        EXPECT_LE(e * e, mean_se);
        ++checked;
    }
    EXPECT_GT(checked, 0u);
}

TEST(Backtest, CumulativePathsEndAtTheRatio) {
    const auto& f = fixture();
    for (auto metal : f.config.metals) {
        const auto& ev = f.report.evaluation(metal);
        for (int h : f.config.table_horizons) {
            const auto& paths = ev.cumpaths.at(h);
            ASSERT_FALSE(paths.empty());
            for (const auto& path : paths) {
                ASSERT_FALSE(path.ratio.empty()) << path.model;
                const auto cell = std::find_if(ev.ratios.at(h).begin(), ev.ratios.at(h).end(),
                                               [&](const RatioCell& c) { return c.model == path.model; });
                ASSERT_NE(cell, ev.ratios.at(h).end());
                EXPECT_NEAR(path.ratio.back(), cell->value, 1e-12) << path.model << " h" << h;
                EXPECT_TRUE(std::is_sorted(path.dates.begin(), path.dates.end()));
            }
        }
    }
}

TEST(Backtest, WorkerCountDoesNotChangeResults) {
    const auto& f = fixture();
    auto config = f.config;
    config.workers = 3;
    config.mcs.workers = 3;
    const auto again = run_backtest(config, f.panel, f.model_free);
    EXPECT_EQ(forecasts_to_csv(again.forecasts), forecasts_to_csv(f.report.forecasts));
    EXPECT_EQ(errors_to_log(again.errors), errors_to_log(f.report.errors));
    for (auto metal : f.config.metals) {
        EXPECT_EQ(mcs_json(again.evaluation(metal)), mcs_json(f.report.evaluation(metal)));
    }
    EXPECT_EQ(run_manifest_json(config), run_manifest_json(f.config));
}

TEST(Backtest, ReportRoundTripsThroughItsFiles) {
    const auto& f = fixture();
    const auto forecasts = forecasts_from_csv(forecasts_to_csv(f.report.forecasts));
    ASSERT_EQ(forecasts.size(), f.report.forecasts.size());
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        EXPECT_EQ(forecasts[i].model, f.report.forecasts[i].model);
        EXPECT_EQ(forecasts[i].level, f.report.forecasts[i].level);
        EXPECT_EQ(forecasts[i].growth, f.report.forecasts[i].growth);
        EXPECT_EQ(forecasts[i].realized, f.report.forecasts[i].realized);
    }
    const auto errors = errors_from_log(errors_to_log(f.report.errors));
    ASSERT_EQ(errors.size(), f.report.errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        EXPECT_EQ(errors[i].model, f.report.errors[i].model);
        EXPECT_EQ(errors[i].origin, f.report.errors[i].origin);
        EXPECT_EQ(errors[i].stage, f.report.errors[i].stage);
        EXPECT_EQ(errors[i].message, f.report.errors[i].message);
    }

    const auto re = evaluate_forecasts(f.config, forecasts, errors);
    EXPECT_EQ(forecasts_to_csv(re.forecasts), forecasts_to_csv(f.report.forecasts));
    for (auto metal : f.config.metals) {
        const auto& a = re.evaluation(metal);
        const auto& b = f.report.evaluation(metal);
        EXPECT_EQ(ratio_table_long_csv(a, f.config.horizons), ratio_table_long_csv(b, f.config.horizons));
        EXPECT_EQ(mcs_json(a), mcs_json(b));
        EXPECT_EQ(pooling_table_csv(a, f.config.table_horizons, "RW-D"),
                  pooling_table_csv(b, f.config.table_horizons, "RW-D"));
    }
}

TEST(Backtest, EmitsTheReportFileSet) {
    const auto& f = fixture();
    TempDir out("report");
    emit_report(f.report, f.config, out.str());
    std::set<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(out.path())) files.insert(e.path().filename().string());
    std::set<std::string> expected{"forecasts.csv", "pools.csv", "errors.log", "run_manifest.json"};
    for (const std::string metal : {"copper", "nickel"}) {
        expected.insert("ratio_table_" + metal + ".csv");
        expected.insert("ratio_table_" + metal + "_long.csv");
        expected.insert("mcs_" + metal + ".json");
        expected.insert("pooling_" + metal + ".csv");
        for (int h : f.config.table_horizons) expected.insert("cumpath_" + metal + "_h" + std::to_string(h) + ".csv");
    }
    EXPECT_EQ(files, expected);

    const auto forecasts = csv::read_file((out.path() / "forecasts.csv").string());
    EXPECT_EQ(forecasts.substr(0, forecasts.find('\n')), "metal,model,origin,horizon,growth,level,origin_price,realized");
    const auto pools = csv::read_file((out.path() / "pools.csv").string());
    EXPECT_EQ(pools.substr(0, pools.find('\n')), "metal,horizon,variant,origin,level,members,warmup,fallback");
    const auto table = csv::read_file((out.path() / "ratio_table_copper.csv").string());
    EXPECT_EQ(table.substr(0, table.find('\n')), "Model,1,3,6");
    const auto pooling = csv::read_file((out.path() / "pooling_copper.csv").string());
    EXPECT_NE(pooling.find("\nRW-D,"), std::string::npos);
    EXPECT_NE(pooling.find("\nSSM25,"), std::string::npos);
    EXPECT_NE(pooling.find("\nTop 2,"), std::string::npos);
    const auto cum = csv::read_file((out.path() / "cumpath_copper_h1.csv").string());
    EXPECT_EQ(cum.substr(0, cum.find('\n')), "date,model,ratio");
}

TEST(Backtest, BenchmarkOnlyRunHasOneRow) {
    const auto& f = fixture();
    auto config = f.config;
    config.models.resize(1);
    config.futures = false;
    config.survey = false;
    config.pooling = false;
    const auto r = run_backtest(config, f.panel, f.model_free);
    for (auto metal : config.metals) {
        const auto& ev = r.evaluation(metal);
        EXPECT_EQ(ev.models, (std::vector<std::string>{"RW-D"}));
        for (int h : config.horizons) {
            ASSERT_EQ(ev.ratios.at(h).size(), 1u);
            EXPECT_TRUE(ev.ratios.at(h).front().is_benchmark);
        }
        const auto csv = ratio_table_csv(ev, config.table_horizons, "RW-D");
        EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    }
    EXPECT_TRUE(r.pools.empty());
}

TEST(Backtest, OriginsClipToThePanel) {
    const auto& f = fixture();
    auto config = f.config;
    config.first_origin.reset();
    config.last_origin.reset();
    const auto all = forecast_origins(config, f.panel);
    ASSERT_FALSE(all.empty());
    EXPECT_GE(all.front(), f.panel.first_vintage());
    EXPECT_LE(all.back(), f.panel.last_vintage());
    config.first_origin = f.panel.last_vintage() + 5;
    config.last_origin = f.panel.last_vintage() + 9;
    EXPECT_THROW(forecast_origins(config, f.panel), ConfigError);
}
