#include "metalcast/backtest.hpp"

#include "metalcast/errors.hpp"
#include "metalcast/parallel.hpp"
#include "metalcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace metalcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_pool(const std::string& id) { return id.rfind("pool_", 0) == 0; }

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::string benchmark_id(const BacktestConfig& config) {
    for (const auto& m : config.models) {
        if (m.family == ModelFamily::RWD) return m.id;
    }
    throw ConfigError("no RW-D benchmark configured");
}

// Real target price from the final first-release data, in base-month units.
MonthlySeries realized_path(const RealTimePanel& panel, Metal metal, YearMonth base, const std::string& cpi_id) {
    const auto& nominal = panel.first_release(price_id(metal));
    const auto& cpi = panel.first_release(cpi_id);
    const auto base_cpi = cpi.find(base);
    if (!base_cpi) throw CoverageError(fmt::format("CPI first release does not cover the base month {}", base.str()));
    MonthlySeries out;
    out.start = nominal.start;
    for (std::size_t i = 0; i < nominal.size(); ++i) {
        const auto date = nominal.start + static_cast<int>(i);
        const auto c = cpi.find(date);
        if (!c) {
            if (out.values.empty()) {
                out.start = date + 1;
                continue;
            }
            break;
        }
        out.values.push_back(nominal.values[i] * *base_cpi / *c);
    }
    return out;
}

struct CellResult {
    std::vector<ForecastRecord> records;
    std::vector<ErrorEntry> errors;
};

void record_failure(CellResult& out, Metal metal, const std::string& model, YearMonth origin,
                    const std::vector<int>& horizons, const std::string& stage, const std::string& message) {
    for (int h : horizons) out.errors.push_back({metal, model, origin, h, stage, message});
}

// Futures and survey horizons that exist for a model-free id.
std::vector<int> model_free_horizons(const std::string& id, const std::vector<int>& horizons) {
    std::vector<int> out;
    for (int h : horizons) {
        if (id == kFuturesId && std::find(std::begin(kFuturesMaturities), std::end(kFuturesMaturities), h) !=
                                    std::end(kFuturesMaturities)) {
            out.push_back(h);
        }
        if (id == kSurveyId && h >= kSurveyMinHorizon && h <= kSurveyMaxHorizon) out.push_back(h);
    }
    return out;
}

struct ModelFreeIndex {
    std::map<std::tuple<Metal, YearMonth, int>, FuturesQuote> futures;
    std::set<Metal> futures_metals;
    std::map<std::pair<Metal, YearMonth>, const FixedEventSurvey*> surveys;
    std::set<Metal> survey_metals;
};

ModelFreeIndex index_model_free(const BacktestConfig& config, const ModelFreeData& data) {
    ModelFreeIndex idx;
    if (config.futures) {
        for (const auto& q : data.futures) {
            idx.futures[{q.metal, q.quote_date, q.maturity}] = q;
            idx.futures_metals.insert(q.metal);
        }
    }
    if (config.survey) {
        for (const auto& [metal, list] : data.surveys) {
            for (const auto& s : list) idx.surveys[{metal, s.survey_date}] = &s;
            if (!list.empty()) idx.survey_metals.insert(metal);
        }
    }
    return idx;
}

void model_free_cell(CellResult& out, const BacktestConfig& config, const ModelFreeIndex& idx, const Snapshot& snap,
                     const ForecastContext& ctx) {
    const auto metal = ctx.metal;
    const auto origin = ctx.origin;
    const bool futures = idx.futures_metals.count(metal) != 0;
    const bool survey = idx.survey_metals.count(metal) != 0;
    if (!futures && !survey) return;

    const auto& cpi = snap.series.at(config.cpi_id);
    std::vector<double> rel;
    const double base = cpi.at(config.base_month);
    for (double v : cpi.tail(config.window).values) rel.push_back(v / base);
    const double p0 = ctx.origin_price();
    auto emit = [&](const std::string& id, int h, double level) {
        ForecastRecord r;
        r.metal = metal;
        r.model = id;
        r.origin = origin;
        r.horizon = h;
        r.level = level;
        r.origin_price = p0;
        r.growth = std::log(level / p0) / h;
        out.records.push_back(std::move(r));
    };

    if (futures) {
        for (int h : model_free_horizons(kFuturesId, config.horizons)) {
            auto it = idx.futures.find({metal, origin, h});
            if (it == idx.futures.end()) {
                out.errors.push_back({metal, kFuturesId, origin, h, "model_free", "no futures quote at the origin"});
                continue;
            }
            try {
                emit(kFuturesId, h, futures_implied_real_price(it->second, cpi_index_projection(rel, h)));
            } catch (const Error& e) {
                out.errors.push_back({metal, kFuturesId, origin, h, "model_free", e.what()});
            }
        }
    }
    if (survey) {
        const auto horizons = model_free_horizons(kSurveyId, config.horizons);
        auto it = idx.surveys.find({metal, origin});
        if (it == idx.surveys.end()) {
            record_failure(out, metal, kSurveyId, origin, horizons, "model_free", "no survey at the origin");
            return;
        }
        for (int h : horizons) {
            try {
                double level = fixed_event_to_fixed_horizon(*it->second, h);
                if (config.survey_deflate) level /= cpi_index_projection(rel, h).projected;
                emit(kSurveyId, h, level);
            } catch (const Error& e) {
                out.errors.push_back({metal, kSurveyId, origin, h, "model_free", e.what()});
            }
        }
    }
}

CellResult forecast_cell(const BacktestConfig& config, const RealTimePanel& panel, const ModelFreeIndex& idx,
                         const Snapshot* snap, const std::string& snap_error, Metal metal, YearMonth origin) {
    CellResult out;
    std::vector<std::string> all_models;
    for (const auto& m : config.models) all_models.push_back(m.id);
    auto fail_all = [&](const std::string& stage, const std::string& message) {
        for (const auto& id : all_models) record_failure(out, metal, id, origin, config.horizons, stage, message);
        if (idx.futures_metals.count(metal) != 0) {
            record_failure(out, metal, kFuturesId, origin, model_free_horizons(kFuturesId, config.horizons), stage, message);
        }
        if (idx.survey_metals.count(metal) != 0) {
            record_failure(out, metal, kSurveyId, origin, model_free_horizons(kSurveyId, config.horizons), stage, message);
        }
    };
    if (snap == nullptr) {
        fail_all("nowcast", snap_error);
        return out;
    }
    ForecastContext ctx;
    try {
        ctx = make_context(*snap, panel, metal, config.window, config.base_month, config.cpi_id);
        (void)ctx.origin_price();
    } catch (const Error& e) {
        fail_all("context", e.what());
        return out;
    }
    const int max_h = config.max_horizon();
    for (const auto& spec : config.models) {
        std::vector<double> fan;
        try {
            fan = forecast_fan(ctx, spec, max_h);
        } catch (const Error& e) {
            record_failure(out, metal, spec.id, origin, config.horizons, "model", e.what());
            continue;
        }
        for (int h : config.horizons) {
            try {
                ForecastRecord r;
                r.metal = metal;
                r.model = spec.id;
                r.origin = origin;
                r.horizon = h;
                r.growth = fan[static_cast<std::size_t>(h - 1)];
                r.origin_price = ctx.origin_price();
                r.level = reconstruct_level(r.origin_price, fan, h);
                out.records.push_back(std::move(r));
            } catch (const Error& e) {
                out.errors.push_back({metal, spec.id, origin, h, "model", e.what()});
            }
        }
    }
    model_free_cell(out, config, idx, *snap, ctx);
    return out;
}

// Column order of a metal: configured models, model-free ids, pools.
std::vector<std::string> column_order(const BacktestConfig& config, const std::vector<ForecastRecord>& forecasts,
                                      Metal metal) {
    std::vector<std::string> cols;
    for (const auto& m : config.models) cols.push_back(m.id);
    std::set<std::string> present;
    for (const auto& r : forecasts) {
        if (r.metal == metal) present.insert(r.model);
    }
    for (const char* id : {kFuturesId, kSurveyId}) {
        if (present.count(id) != 0) cols.emplace_back(id);
    }
    if (config.pooling) {
        for (auto v : {PoolVariant::All, PoolVariant::SSM, PoolVariant::Top2}) cols.push_back(pool_id(v));
    }
    return cols;
}

void sort_records(std::vector<ForecastRecord>& records, const BacktestConfig& config,
                  const std::map<Metal, std::vector<std::string>>& columns) {
    auto metal_rank = [&](Metal m) {
        return static_cast<std::size_t>(std::find(config.metals.begin(), config.metals.end(), m) - config.metals.begin());
    };
    auto model_rank = [&](Metal m, const std::string& id) {
        const auto& cols = columns.at(m);
        return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), id) - cols.begin());
    };
    std::sort(records.begin(), records.end(), [&](const ForecastRecord& a, const ForecastRecord& b) {
        return std::make_tuple(metal_rank(a.metal), model_rank(a.metal, a.model), a.origin, a.horizon) <
               std::make_tuple(metal_rank(b.metal), model_rank(b.metal, b.model), b.origin, b.horizon);
    });
}

}  // namespace

const MetalEvaluation& BacktestReport::evaluation(Metal m) const {
    for (const auto& e : metals) {
        if (e.metal == m) return e;
    }
    throw ConfigError(fmt::format("metal {} was not evaluated", to_string(m)));
}

StageSeeds stage_seeds(const BacktestConfig& config) {
    const auto root = config.seed.value_or(0);
    return {derive_seed(root, {1}), derive_seed(root, {2}), derive_seed(root, {3}), derive_seed(root, {4})};
}

std::vector<YearMonth> forecast_origins(const BacktestConfig& config, const RealTimePanel& panel) {
    const auto first_v = panel.first_vintage();
    const auto last_v = panel.last_vintage();
    const auto first = config.first_origin.value_or(first_v);
    const auto last = config.last_origin.value_or(last_v);
    if (first < first_v || last > last_v) {
        throw ConfigError(fmt::format("forecast origins {}..{} fall outside the panel vintages {}..{}", first.str(), last.str(),
                                      first_v.str(), last_v.str()));
    }
    if (last < first) throw ConfigError("no forecast origins");
    std::vector<YearMonth> out;
    for (auto d = first; d <= last; d = d + 1) out.push_back(d);
    return out;
}

BacktestReport run_backtest(const BacktestConfig& config) {
    config.validate();
    const auto manifest = load_manifest(config.manifest);
    const auto panel = load_panel(manifest);
    const auto model_free = load_model_free(manifest);
    return run_backtest(config, panel, model_free);
}

BacktestReport run_backtest(const BacktestConfig& config, const RealTimePanel& panel, const ModelFreeData& model_free) {
    config.validate();
    if (!panel.has(config.cpi_id)) throw ConfigError(fmt::format("panel has no CPI series '{}'", config.cpi_id));
    for (auto m : config.metals) {
        if (!panel.has(price_id(m))) throw ConfigError(fmt::format("panel has no price series '{}'", price_id(m)));
    }
    const auto origins = forecast_origins(config, panel);
    const auto seeds = stage_seeds(config);
    const auto idx = index_model_free(config, model_free);

    NowcastModelSpec fill = config.nowcast;
    fill.mcmc.seed = seeds.nowcast;
    NowcastOptions fill_options;
    fill_options.window = config.nowcast_window;

    std::vector<std::optional<Snapshot>> snaps(origins.size());
    std::vector<std::string> snap_errors(origins.size());
    parallel_for(origins.size(), config.workers, [&](std::size_t i) {
        try {
            snaps[i] = fill_missing_tail(panel, origins[i], fill, fill_options);
        } catch (const NowcastFailure& e) {
            snap_errors[i] = e.what();
        } catch (const MissingVintageError& e) {
            snap_errors[i] = e.what();
        }
    });

    const auto n_metals = config.metals.size();
    std::vector<CellResult> cells(origins.size() * n_metals);
    parallel_for(cells.size(), config.workers, [&](std::size_t k) {
        const auto o = k / n_metals;
        const auto metal = config.metals[k % n_metals];
        cells[k] = forecast_cell(config, panel, idx, snaps[o] ? &*snaps[o] : nullptr, snap_errors[o], metal, origins[o]);
    });

    std::vector<ForecastRecord> forecasts;
    std::vector<ErrorEntry> errors;
    std::map<Metal, MonthlySeries> truth;
    for (auto m : config.metals) truth[m] = realized_path(panel, m, config.base_month, config.cpi_id);
    for (auto& c : cells) {
        for (auto& r : c.records) {
            r.realized = truth.at(r.metal).find(r.origin + r.horizon);
            forecasts.push_back(std::move(r));
        }
        for (auto& e : c.errors) errors.push_back(std::move(e));
    }

    auto report = evaluate_forecasts(config, std::move(forecasts), std::move(errors));
    report.origins = origins;

    if (config.horse_race) {
        HorseRaceConfig race;
        race.first_vintage = origins.front();
        race.last_vintage = origins.back();
        race.window = config.nowcast_window;
        race.variables = config.race_variables;
        race.workers = config.workers;
        race.dm = config.dm;
        auto models = config.race_models;
        for (auto& m : models) m.mcmc.seed = seeds.race;
        report.nowcast = nowcast_horse_race(panel, models, race);
    }
    return report;
}

BacktestReport evaluate_forecasts(const BacktestConfig& config, std::vector<ForecastRecord> forecasts,
                                  std::vector<ErrorEntry> errors) {
    const auto seeds = stage_seeds(config);
    BacktestReport report;
    report.benchmark = benchmark_id(config);
    std::erase_if(forecasts, [](const ForecastRecord& r) { return is_pool(r.model); });

    std::map<Metal, std::vector<std::string>> columns;
    for (auto m : config.metals) columns[m] = column_order(config, forecasts, m);
    std::erase_if(forecasts, [&](const ForecastRecord& r) {
        return columns.count(r.metal) == 0 || !contains(config.horizons, r.horizon);
    });

    std::set<YearMonth> origin_set;
    for (const auto& r : forecasts) origin_set.insert(r.origin);
    const std::vector<YearMonth> origins(origin_set.begin(), origin_set.end());
    auto origin_row = [&](YearMonth d) {
        return static_cast<std::size_t>(std::lower_bound(origins.begin(), origins.end(), d) - origins.begin());
    };

    // Level forecast grids per (metal, horizon): origins x models, NaN where absent.
    struct Grid {
        Metal metal;
        int horizon;
        std::vector<std::string> models;  // non-pool columns
        Eigen::MatrixXd levels;
        std::vector<double> realized;
        std::vector<double> origin_prices;
    };
    std::vector<Grid> grids;
    std::map<std::pair<Metal, int>, std::size_t> grid_index;
    for (auto m : config.metals) {
        std::vector<std::string> models;
        for (const auto& id : columns[m]) {
            if (!is_pool(id)) models.push_back(id);
        }
        for (int h : config.horizons) {
            grid_index[{m, h}] = grids.size();
            grids.push_back({m, h, models,
                             Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(origins.size()),
                                                       static_cast<Eigen::Index>(models.size()), kNaN),
                             std::vector<double>(origins.size(), kNaN), std::vector<double>(origins.size(), kNaN)});
        }
    }
    for (const auto& r : forecasts) {
        auto& g = grids[grid_index.at({r.metal, r.horizon})];
        const auto col = std::find(g.models.begin(), g.models.end(), r.model) - g.models.begin();
        const auto row = static_cast<Eigen::Index>(origin_row(r.origin));
        g.levels(row, col) = r.level;
        if (r.realized) g.realized[static_cast<std::size_t>(row)] = *r.realized;
        g.origin_prices[static_cast<std::size_t>(row)] = r.origin_price;
    }

    // Pooling, parallel across (metal, horizon) streams.
    const std::vector<PoolVariant> variants{PoolVariant::All, PoolVariant::SSM, PoolVariant::Top2};
    std::vector<std::vector<std::vector<PooledForecast>>> pooled(grids.size());
    if (config.pooling) {
        PoolingSpec spec = config.pooling_spec;
        spec.mcs.seed = seeds.pooling;
        spec.mcs.workers = 1;
        parallel_for(grids.size(), config.workers, [&](std::size_t i) {
            const auto& g = grids[i];
            HorizonStream stream{g.metal, g.horizon, origins, g.models, g.levels, g.realized};
            pooled[i] = pool_streams(stream, variants, spec);
        });
        for (std::size_t i = 0; i < grids.size(); ++i) {
            const auto& g = grids[i];
            for (std::size_t v = 0; v < variants.size(); ++v) {
                for (const auto& pf : pooled[i][v]) {
                    ForecastRecord r;
                    r.metal = g.metal;
                    r.model = pool_id(variants[v]);
                    r.origin = pf.origin;
                    r.horizon = g.horizon;
                    r.level = pf.level;
                    const auto row = origin_row(pf.origin);
                    r.origin_price = g.origin_prices[row];
                    r.growth = std::log(r.level / r.origin_price) / g.horizon;
                    const double realized = g.realized[row];
                    if (std::isfinite(realized)) r.realized = realized;
                    forecasts.push_back(r);
                    report.pools.push_back({g.metal, g.horizon, variants[v], pf});
                }
            }
        }
    }
    sort_records(forecasts, config, columns);

    // Loss matrices and statistics per (metal, horizon).
    for (auto m : config.metals) {
        MetalEvaluation ev;
        ev.metal = m;
        ev.models = columns[m];
        report.metals.push_back(std::move(ev));
    }
    std::vector<std::pair<std::size_t, int>> tasks;
    for (std::size_t mi = 0; mi < config.metals.size(); ++mi) {
        for (int h : config.horizons) tasks.emplace_back(mi, h);
    }
    struct HorizonResult {
        std::optional<LossMatrix> losses;
        std::vector<RatioCell> ratios;
        std::optional<MCSResult> mcs;
        std::string mcs_note;
        std::vector<CumulativePath> cumpaths;
    };
    std::vector<HorizonResult> results(tasks.size());
    parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
        const auto [mi, h] = tasks[t];
        const auto metal = config.metals[mi];
        const auto& g = grids[grid_index.at({metal, h})];
        const auto& cols = columns.at(metal);
        std::vector<std::size_t> rows;
        for (std::size_t o = 0; o < origins.size(); ++o) {
            if (std::isfinite(g.realized[o])) rows.push_back(o);
        }
        Eigen::MatrixXd L = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(rows.size()),
                                                      static_cast<Eigen::Index>(cols.size()), kNaN);
        std::vector<YearMonth> dates;
        for (auto o : rows) dates.push_back(origins[o]);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto gc = std::find(g.models.begin(), g.models.end(), cols[c]) - g.models.begin();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                double level = kNaN;
                if (gc < static_cast<std::ptrdiff_t>(g.models.size())) {
                    level = g.levels(static_cast<Eigen::Index>(rows[i]), gc);
                } else if (config.pooling) {
                    const auto v = static_cast<std::size_t>(
                        std::find_if(variants.begin(), variants.end(), [&](PoolVariant pv) { return pool_id(pv) == cols[c]; }) -
                        variants.begin());
                    for (const auto& pf : pooled[grid_index.at({metal, h})][v]) {
                        if (pf.origin == origins[rows[i]]) level = pf.level;
                    }
                }
                const double e = level - g.realized[rows[i]];
                L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = e * e;
            }
        }
        auto& res = results[t];
        if (rows.empty()) {
            res.mcs_note = "no realized outcomes";
            res.losses = LossMatrix(h, dates, cols, L);
            return;
        }
        res.losses = LossMatrix(h, dates, cols, L);
        try {
            res.ratios = ratio_table(*res.losses, report.benchmark, config.dm);
        } catch (const EmptySampleError& e) {
            res.mcs_note = e.what();
            return;
        }
        if (contains(config.table_horizons, h)) {
            // Models observed on too few dates to pass the skip have no path.
            const auto bench = *res.losses->model_index(report.benchmark);
            std::vector<std::size_t> keep{bench};
            for (std::size_t c = 0; c < cols.size(); ++c) {
                const std::size_t pair[] = {c, bench};
                if (c != bench && res.losses->common_rows(pair).size() > config.cumpath_skip) keep.push_back(c);
            }
            Eigen::MatrixXd sub(L.rows(), static_cast<Eigen::Index>(keep.size()));
            std::vector<std::string> ids;
            for (std::size_t k = 0; k < keep.size(); ++k) {
                sub.col(static_cast<Eigen::Index>(k)) = L.col(static_cast<Eigen::Index>(keep[k]));
                ids.push_back(cols[keep[k]]);
            }
            if (res.losses->common_rows(std::span<const std::size_t>(&bench, 1)).size() > config.cumpath_skip) {
                res.cumpaths = cumulative_ratio_path(LossMatrix(h, dates, ids, sub), report.benchmark, config.cumpath_skip);
            }
        }

        // MCS over the individual models observed on every evaluated date.
        std::vector<std::size_t> mcs_cols;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (!is_pool(cols[c]) && L.col(static_cast<Eigen::Index>(c)).allFinite()) mcs_cols.push_back(c);
        }
        if (mcs_cols.empty()) {
            res.mcs_note = "no model is complete on the evaluation sample";
            return;
        }
        McsConfig mcs = config.mcs;
        mcs.workers = 1;
        mcs.seed = derive_seed(seeds.evaluation, {stable_hash(to_string(metal)), static_cast<std::uint64_t>(h)});
        try {
            res.mcs = mcs_procedure(res.losses->complete_block(mcs_cols), mcs);
        } catch (const Error& e) {
            res.mcs_note = e.what();
        }
    });
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        auto& ev = report.metals[tasks[t].first];
        const int h = tasks[t].second;
        auto& res = results[t];
        if (res.losses) ev.losses.emplace(h, std::move(*res.losses));
        if (!res.ratios.empty()) ev.ratios.emplace(h, std::move(res.ratios));
        if (res.mcs) ev.mcs.emplace(h, std::move(*res.mcs));
        if (!res.mcs_note.empty()) ev.mcs_notes.emplace(h, std::move(res.mcs_note));
        if (!res.cumpaths.empty()) ev.cumpaths.emplace(h, std::move(res.cumpaths));
    }

    std::sort(errors.begin(), errors.end(), [&](const ErrorEntry& a, const ErrorEntry& b) {
        return std::tie(a.metal, a.model, a.origin, a.horizon) < std::tie(b.metal, b.model, b.origin, b.horizon);
    });
    report.forecasts = std::move(forecasts);
    report.errors = std::move(errors);
    report.origins = origins;
    return report;
}

}  // namespace metalcast
