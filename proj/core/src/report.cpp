#include "metalcast/report.hpp"

#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include <fmt/format.h>

#ifndef METALCAST_VERSION
#define METALCAST_VERSION "0.0.0"
#endif

namespace metalcast {

namespace {

using Json = nlohmann::ordered_json;

std::string number(double v) { return std::isfinite(v) ? fmt::format("{}", v) : std::string("NaN"); }

double parse_number(std::string_view field, std::size_t line) {
    if (field == "NaN") return std::numeric_limits<double>::quiet_NaN();
    return csv::to_double(field, line);
}

const RatioCell* find_cell(const MetalEvaluation& ev, int h, std::string_view model) {
    auto it = ev.ratios.find(h);
    if (it == ev.ratios.end()) return nullptr;
    for (const auto& c : it->second) {
        if (c.model == model && c.n > 0 && std::isfinite(c.value)) return &c;
    }
    return nullptr;
}

bool in_ssm(const MetalEvaluation& ev, int h, std::string_view model, double alpha) {
    auto it = ev.mcs.find(h);
    if (it == ev.mcs.end()) return false;
    for (const auto& [a, members] : it->second.ssm) {
        if (std::abs(a - alpha) < 1e-12) return std::find(members.begin(), members.end(), model) != members.end();
    }
    return false;
}

std::string table_header(const std::vector<int>& horizons) {
    std::string out = "Model";
    for (int h : horizons) out += fmt::format(",{}", h);
    return out + "\n";
}

std::string table_row(const MetalEvaluation& ev, const std::vector<int>& horizons, const std::string& model,
                      const std::string& label, int benchmark_decimals) {
    std::string out = label;
    for (int h : horizons) {
        const auto* c = find_cell(ev, h, model);
        if (c == nullptr) {
            out += ",-";
        } else if (c->is_benchmark) {
            out += fmt::format(",{:.{}f}", c->value, benchmark_decimals);
        } else {
            out += "," + format_ratio(c->value, c->dm, 3);
        }
    }
    return out + "\n";
}

std::string variant_label(PoolVariant v) {
    switch (v) {
        case PoolVariant::All: return "All";
        case PoolVariant::SSM: return "SSM";
        case PoolVariant::Top2: return "Top2";
    }
    return "";
}

}  // namespace

std::string_view library_version() { return METALCAST_VERSION; }

std::string forecasts_to_csv(const std::vector<ForecastRecord>& forecasts) {
    std::string out = "metal,model,origin,horizon,growth,level,origin_price,realized\n";
    for (const auto& r : forecasts) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(r.metal), r.model, r.origin.str(), r.horizon,
                           number(r.growth), number(r.level), number(r.origin_price),
                           r.realized ? number(*r.realized) : std::string());
    }
    return out;
}

std::vector<ForecastRecord> forecasts_from_csv(std::string_view content) {
    std::vector<ForecastRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        const auto line = csv::trim(content.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line_no == 1) {
            if (line.rfind("metal,model,origin,horizon", 0) != 0) throw ParseError("unexpected forecast header", 1);
            continue;
        }
        if (line.empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 8) throw ParseError(fmt::format("expected 8 fields, got {}", f.size()), line_no);
        ForecastRecord r;
        r.metal = parse_metal(f[0]);
        r.model = f[1];
        r.origin = YearMonth::parse(f[2]);
        r.horizon = csv::to_int(f[3], line_no);
        r.growth = parse_number(f[4], line_no);
        r.level = parse_number(f[5], line_no);
        r.origin_price = parse_number(f[6], line_no);
        if (!f[7].empty()) r.realized = parse_number(f[7], line_no);
        out.push_back(std::move(r));
    }
    return out;
}

std::string errors_to_log(const std::vector<ErrorEntry>& errors) {
    std::string out;
    for (const auto& e : errors) {
        std::string msg = e.message;
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::replace(msg.begin(), msg.end(), '\t', ' ');
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", to_string(e.metal), e.model, e.origin.str(), e.horizon, e.stage,
                           msg);
    }
    return out;
}

std::vector<ErrorEntry> errors_from_log(std::string_view content) {
    std::vector<ErrorEntry> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        const auto line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line, '\t');
        if (f.size() != 6) throw ParseError("expected 6 tab separated fields", line_no);
        out.push_back({parse_metal(f[0]), f[1], YearMonth::parse(f[2]), csv::to_int(f[3], line_no), f[4], f[5]});
    }
    return out;
}

std::string ratio_table_csv(const MetalEvaluation& ev, const std::vector<int>& horizons, std::string_view benchmark) {
    std::string out = table_header(horizons);
    for (const auto& m : ev.models) {
        const std::string label = m == benchmark ? "RW-D" : m;
        out += table_row(ev, horizons, m, label, 3);
    }
    return out;
}

std::string ratio_table_long_csv(const MetalEvaluation& ev, const std::vector<int>& horizons) {
    std::string out = "model,horizon,value,n,is_benchmark,dm_stat,stars,in_ssm25\n";
    for (const auto& m : ev.models) {
        for (int h : horizons) {
            const auto* c = find_cell(ev, h, m);
            if (c == nullptr) continue;
            out += fmt::format("{},{},{},{},{},{},{},{}\n", m, h, number(c->value), c->n, c->is_benchmark ? 1 : 0,
                               c->dm ? number(c->dm->statistic) : std::string(),
                               c->dm ? std::string(stars(c->dm->level)) : std::string(),
                               in_ssm(ev, h, m, 0.25) ? 1 : 0);
        }
    }
    return out;
}

std::string mcs_json(const MetalEvaluation& ev) {
    Json j;
    j["metal"] = std::string(to_string(ev.metal));
    auto arr = Json::array();
    std::vector<int> horizons;
    for (const auto& [h, _] : ev.losses) horizons.push_back(h);
    for (int h : horizons) {
        Json e;
        e["horizon"] = h;
        if (auto it = ev.mcs.find(h); it != ev.mcs.end()) {
            const auto& r = it->second;
            Json p;
            for (std::size_t i = 0; i < r.models.size(); ++i) p[r.models[i]] = r.p_values[i];
            e["p_values"] = std::move(p);
            e["elimination_order"] = r.elimination_order;
            Json ssm = Json::array();
            for (const auto& [a, members] : r.ssm) {
                Json s;
                s["alpha"] = a;
                s["members"] = members;
                ssm.push_back(std::move(s));
            }
            e["ssm"] = std::move(ssm);
            e["stopped_on_ties"] = r.stopped_on_ties;
            e["replications"] = r.config.replications;
            e["block"] = r.config.block;
            e["observations"] = ev.losses.at(h).dates().size();
        } else {
            auto note = ev.mcs_notes.find(h);
            e["note"] = note == ev.mcs_notes.end() ? std::string("not run") : note->second;
        }
        arr.push_back(std::move(e));
    }
    j["horizons"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string pooling_table_csv(const MetalEvaluation& ev, const std::vector<int>& horizons, std::string_view benchmark) {
    std::string out = table_header(horizons);
    out += table_row(ev, horizons, std::string(benchmark), "RW-D", 0);
    out += table_row(ev, horizons, pool_id(PoolVariant::SSM), "SSM25", 0);
    out += table_row(ev, horizons, pool_id(PoolVariant::Top2), "Top 2", 0);
    return out;
}

std::string cumpath_csv(const std::vector<CumulativePath>& paths) {
    std::string out = "date,model,ratio\n";
    for (const auto& p : paths) {
        for (std::size_t i = 0; i < p.dates.size(); ++i) {
            out += fmt::format("{},{},{}\n", p.dates[i].str(), p.model, number(p.ratio[i]));
        }
    }
    return out;
}

std::string pools_csv(const std::vector<PoolRecord>& pools) {
    std::string out = "metal,horizon,variant,origin,level,members,warmup,fallback\n";
    for (const auto& p : pools) {
        std::string members;
        for (const auto& m : p.forecast.members) members += (members.empty() ? "" : ";") + m;
        out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(p.metal), p.horizon, variant_label(p.variant),
                           p.forecast.origin.str(), number(p.forecast.level), members, p.forecast.warmup ? 1 : 0,
                           p.forecast.fallback ? 1 : 0);
    }
    return out;
}

std::string run_manifest_json(const BacktestConfig& config) {
    Json j;
    j["version"] = std::string(library_version());
    j["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
    j["nlohmann_json"] = fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                     NLOHMANN_JSON_VERSION_PATCH);
    j["fmt"] = FMT_VERSION;
    if (config.seed) {
        j["seed"] = *config.seed;
    } else {
        j["seed"] = nullptr;
    }
    j["manifest"] = std::filesystem::path(config.manifest).filename().string();
    std::vector<std::string> metals;
    for (auto m : config.metals) metals.emplace_back(to_string(m));
    j["metals"] = metals;
    j["horizons"] = config.horizons;
    j["window"] = config.window;
    j["first_origin"] = config.first_origin ? config.first_origin->str() : std::string();
    j["last_origin"] = config.last_origin ? config.last_origin->str() : std::string();
    j["base_month"] = config.base_month.str();
    j["cpi"] = config.cpi_id;

    Json nc;
    nc["fill_model"] = std::string(display_name(config.nowcast.family));
    nc["max_lag"] = config.nowcast.max_lag;
    nc["draws"] = config.nowcast.mcmc.draws;
    nc["burn_in"] = config.nowcast.mcmc.burn_in;
    nc["window"] = config.nowcast_window;
    nc["horse_race"] = config.horse_race;
    if (config.horse_race) {
        std::vector<std::string> race;
        for (const auto& m : config.race_models) race.emplace_back(display_name(m.family));
        nc["race_models"] = race;
        nc["race_variables"] = config.race_variables;
    }
    j["nowcast"] = std::move(nc);

    Json mf;
    mf["futures"] = config.futures;
    mf["survey"] = config.survey;
    mf["survey_deflate"] = config.survey_deflate;
    j["model_free"] = std::move(mf);

    Json ev;
    ev["dm_variance"] = config.dm.variance == DmVariance::Hac ? "HAC" : "HLN";
    ev["mcs_replications"] = config.mcs.replications;
    ev["mcs_block"] = config.mcs.block;
    ev["mcs_alphas"] = config.mcs.alphas;
    ev["mcs_statistic"] = config.mcs.statistic == McsStatistic::TMax ? "TMax" : "TRange";
    ev["table_horizons"] = config.table_horizons;
    ev["cumpath_skip"] = config.cumpath_skip;
    j["evaluation"] = std::move(ev);

    Json pool;
    pool["enabled"] = config.pooling;
    pool["warmup"] = config.pooling_spec.warmup;
    pool["screen_window"] = config.pooling_spec.screen_window;
    pool["alpha"] = config.pooling_spec.alpha;
    j["pooling"] = std::move(pool);

    auto models = Json::array();
    for (const auto& m : config.models) {
        Json e;
        e["id"] = m.id;
        e["family"] = std::string(to_string(m.family));
        e["p"] = m.p.aic ? fmt::format("AIC(1..{})", m.p.max) : std::to_string(m.p.value);
        e["s"] = m.s.aic ? fmt::format("AIC(1..{})", m.s.max) : std::to_string(m.s.value);
        e["predictors"] = m.predictors;
        e["r"] = m.r;
        e["endogenous"] = m.endogenous;
        e["restricted"] = m.restricted;
        e["iterated"] = m.iterated;
        e["factor_divide_by_n"] = m.factor_options.divide_by_n;
        models.push_back(std::move(e));
    }
    j["models"] = std::move(models);
    return j.dump(2) + "\n";
}

void emit_report(const BacktestReport& report, const BacktestConfig& config, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir, ec.message()));
    auto write = [&](const std::string& name, const std::string& content) {
        csv::write_file((fs::path(dir) / name).string(), content);
    };

    write("forecasts.csv", forecasts_to_csv(report.forecasts));
    write("pools.csv", pools_csv(report.pools));
    write("errors.log", errors_to_log(report.errors));
    write("run_manifest.json", run_manifest_json(config));
    for (const auto& ev : report.metals) {
        const auto metal = std::string(to_string(ev.metal));
        std::string lower = metal;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        write(fmt::format("ratio_table_{}.csv", lower), ratio_table_csv(ev, config.table_horizons, report.benchmark));
        write(fmt::format("ratio_table_{}_long.csv", lower), ratio_table_long_csv(ev, config.horizons));
        write(fmt::format("mcs_{}.json", lower), mcs_json(ev));
        write(fmt::format("pooling_{}.csv", lower), pooling_table_csv(ev, config.table_horizons, report.benchmark));
        for (int h : config.table_horizons) {
            auto it = ev.cumpaths.find(h);
            write(fmt::format("cumpath_{}_h{}.csv", lower, h),
                  cumpath_csv(it == ev.cumpaths.end() ? std::vector<CumulativePath>{} : it->second));
        }
    }
    if (report.nowcast) {
        write("nowcast_horse_race.csv", report.nowcast->to_csv());
        write("nowcast_horse_race.json", report.nowcast->to_json());
    }
}

}  // namespace metalcast
