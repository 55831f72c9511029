#include "metalcast/config.hpp"

#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace metalcast {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

pt::ptree read_ini(const std::string& content, const std::string& what) {
    pt::ptree tree;
    std::istringstream in(content);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("{}: {} (line {})", what, e.message(), e.line()));
    }
    return tree;
}

std::string resolve(const std::string& base_dir, const std::string& file) {
    if (file.empty() || fs::path(file).is_absolute()) return file;
    return (fs::path(base_dir) / file).lexically_normal().string();
}

std::string get_string(const pt::ptree& section, const std::string& key, const std::string& fallback) {
    auto v = section.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    return v ? std::string(csv::trim(*v)) : fallback;
}

std::optional<std::string> find_string(const pt::ptree& section, const std::string& key) {
    auto v = section.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return std::string(csv::trim(*v));
}

long long to_integer(const std::string& text, const std::string& key) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, text));
    }
}

double to_real(const std::string& text, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, text));
    }
}

bool to_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError(fmt::format("{}: expected true/false, got '{}'", key, text));
}

std::vector<std::string> to_list(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& f : csv::split(text)) {
        auto t = csv::trim(f);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

int get_int(const pt::ptree& s, const std::string& key, int fallback) {
    auto v = find_string(s, key);
    return v ? static_cast<int>(to_integer(*v, key)) : fallback;
}

double get_real(const pt::ptree& s, const std::string& key, double fallback) {
    auto v = find_string(s, key);
    return v ? to_real(*v, key) : fallback;
}

bool get_bool(const pt::ptree& s, const std::string& key, bool fallback) {
    auto v = find_string(s, key);
    return v ? to_bool(*v, key) : fallback;
}

const pt::ptree& section_or_empty(const pt::ptree& tree, const std::string& name) {
    static const pt::ptree empty;
    auto it = tree.find(name);
    return it == tree.not_found() ? empty : it->second;
}

LagOrder parse_lag(const pt::ptree& s, const std::string& key, const std::string& model) {
    LagOrder lag;
    const auto text = get_string(s, key, "1");
    if (text == "AIC" || text == "aic") {
        lag.aic = true;
    } else {
        lag.value = static_cast<int>(to_integer(text, model + "." + key));
    }
    lag.max = get_int(s, key + "_max", 6);
    return lag;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : to_list(text)) {
        const auto dash = item.find('-', 1);
        if (dash == std::string::npos) {
            out.push_back(static_cast<int>(to_integer(item, "list")));
            continue;
        }
        const auto a = static_cast<int>(to_integer(std::string(csv::trim(item.substr(0, dash))), "list"));
        const auto b = static_cast<int>(to_integer(std::string(csv::trim(item.substr(dash + 1))), "list"));
        if (b < a) throw ConfigError(fmt::format("empty range '{}'", item));
        for (int v = a; v <= b; ++v) out.push_back(v);
    }
    return out;
}

DataManifest load_manifest(const std::string& path) {
    const auto tree = read_ini(csv::read_file(path), path);
    const auto base_dir = fs::path(path).parent_path().string();
    DataManifest m;
    for (const auto& [name, section] : tree) {
        if (name == "panel") {
            if (auto v = find_string(section, "first_vintage")) m.first_vintage = YearMonth::parse(*v);
            continue;
        }
        if (name == "model_free") {
            for (const auto& [key, value] : section) {
                const auto text = std::string(csv::trim(value.data()));
                if (key == "futures") {
                    m.futures_file = resolve(base_dir, text);
                } else if (key.rfind("survey_", 0) == 0) {
                    m.survey_files[parse_metal(key.substr(7))] = resolve(base_dir, text);
                } else {
                    throw ConfigError(fmt::format("[model_free]: unknown key '{}'", key));
                }
            }
            continue;
        }
        ManifestEntry e;
        e.meta.id = name;
        e.file = resolve(base_dir, get_string(section, "file", ""));
        if (e.file.empty()) throw ConfigError(fmt::format("[{}]: missing 'file'", name));
        const auto layout = get_string(section, "layout", "vintages");
        if (layout == "vintages") {
            e.layout = FileLayout::Vintages;
        } else if (layout == "series") {
            e.layout = FileLayout::Series;
        } else {
            throw ConfigError(fmt::format("[{}]: unknown layout '{}'", name, layout));
        }
        e.meta.transform = parse_transform(get_string(section, "transform", "None"));
        e.meta.group = parse_group(get_string(section, "group", "EcAct"));
        e.meta.publication_lag = get_int(section, "publication_lag", 0);
        if (e.meta.publication_lag < 0) throw ConfigError(fmt::format("[{}]: negative publication_lag", name));
        e.meta.source_frequency = parse_frequency(get_string(section, "frequency", "Monthly"));
        e.rebase = get_bool(section, "rebase", false);
        m.entries.push_back(std::move(e));
    }
    if (m.entries.empty()) throw ConfigError(fmt::format("{}: manifest lists no variables", path));
    return m;
}

RealTimePanel load_panel(const DataManifest& manifest) {
    RealTimePanel panel;
    for (const auto& e : manifest.entries) {
        std::vector<Vintage> vintages;
        if (e.layout == FileLayout::Vintages) {
            vintages = ingest_vintage_csv(e.file, e.meta);
        } else {
            if (!manifest.first_vintage) throw ConfigError("[panel] first_vintage is required for series layouts");
            const auto series = parse_series_csv(csv::read_file(e.file));
            if (series.empty()) throw DataError(fmt::format("{}: empty series file", e.meta.id));
            vintages = vintages_from_series(series, e.meta.publication_lag, *manifest.first_vintage,
                                            series.last() + e.meta.publication_lag);
        }
        if (e.rebase) {
            vintages = rebase_index(vintages);
            for (std::size_t k = 1; k < vintages.size(); ++k) {
                auto& cur = vintages[k].data.values;
                const auto& prev = vintages[k - 1].data.values;
                for (std::size_t i = 0; i < std::min(cur.size(), prev.size()); ++i) {
                    if (std::abs(cur[i] - prev[i]) <= 1e-6 * std::abs(prev[i])) cur[i] = prev[i];
                }
            }
        }
        panel.add(e.meta, std::move(vintages));
    }
    return panel;
}

ModelFreeData load_model_free(const DataManifest& manifest) {
    ModelFreeData d;
    if (!manifest.futures_file.empty()) d.futures = parse_futures_csv(csv::read_file(manifest.futures_file));
    for (const auto& [metal, file] : manifest.survey_files) d.surveys[metal] = parse_survey_csv(csv::read_file(file));
    return d;
}

void BacktestConfig::validate() const {
    if (manifest.empty()) throw ConfigError("run.manifest is required");
    if (metals.empty()) throw ConfigError("at least one metal is required");
    if (models.empty()) throw ConfigError("at least one [model:<id>] section is required");
    std::set<std::string> ids;
    for (const auto& m : models) {
        m.validate();
        if (!ids.insert(m.id).second) throw ConfigError(fmt::format("duplicate model id '{}'", m.id));
        if (m.id.rfind("pool_", 0) == 0 || m.id == "Futures" || m.id == "Survey") {
            throw ConfigError(fmt::format("model id '{}' is reserved", m.id));
        }
    }
    if (std::none_of(models.begin(), models.end(), [](const ModelSpec& m) { return m.family == ModelFamily::RWD; })) {
        throw ConfigError("the RW-D benchmark (family = RWD) must be configured");
    }
    if (horizons.empty()) throw ConfigError("horizons must not be empty");
    for (int h : horizons) {
        if (h < 1 || h > kMaxHorizon) throw ConfigError(fmt::format("horizon {} outside 1..{}", h, kMaxHorizon));
    }
    for (int h : table_horizons) {
        if (h < 1 || h > kMaxHorizon) throw ConfigError(fmt::format("table horizon {} outside 1..{}", h, kMaxHorizon));
    }
    if (window < 24) throw ConfigError("window must be at least 24 months");
    if (first_origin && last_origin && *last_origin < *first_origin) {
        throw ConfigError("last_origin precedes first_origin");
    }
    nowcast.validate();
    if (horse_race) {
        if (race_models.empty() || race_models.front().family != NowcastFamily::RWD) {
            throw ConfigError("nowcast race models must start with RWD");
        }
        for (const auto& m : race_models) m.validate();
    }
    if (mcs.replications < 1 || mcs.block < 1) throw ConfigError("MCS replications and block must be positive");
    for (double a : mcs.alphas) {
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("MCS alphas must lie in (0, 1)");
    }
    if (pooling) {
        pooling_spec.validate();
        if (pooling_spec.screen_window < 2 * pooling_spec.mcs.block) {
            throw ConfigError(fmt::format("pooling screen_window {} is shorter than twice the MCS block ({})",
                                          pooling_spec.screen_window, pooling_spec.mcs.block));
        }
    }
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (stochastic() && !seed) throw ConfigError("a seed is required when stochastic components are enabled");
}

int BacktestConfig::max_horizon() const { return *std::max_element(horizons.begin(), horizons.end()); }

bool BacktestConfig::stochastic() const {
    auto bayes = [](const NowcastModelSpec& s) {
        return s.family == NowcastFamily::BAR || s.family == NowcastFamily::BARSV || s.family == NowcastFamily::BARSVO;
    };
    if (bayes(nowcast) || models.size() > 1 || pooling) return true;
    return horse_race && std::any_of(race_models.begin(), race_models.end(), bayes);
}

BacktestConfig parse_config(const std::string& content, const std::string& base_dir) {
    const auto tree = read_ini(content, "config");
    BacktestConfig c;
    for (const auto& [name, section] : tree) {
        static const std::set<std::string> known{"run", "nowcast", "evaluation", "pooling", "model_free"};
        if (known.count(name) == 0 && name.rfind("model:", 0) != 0) {
            throw ConfigError(fmt::format("unknown config section [{}]", name));
        }
    }

    const auto& run = section_or_empty(tree, "run");
    c.manifest = resolve(base_dir, get_string(run, "manifest", ""));
    if (auto v = find_string(run, "metals")) {
        c.metals.clear();
        for (const auto& m : to_list(*v)) c.metals.push_back(parse_metal(m));
    }
    c.horizons = parse_int_list(get_string(run, "horizons", "1-24"));
    c.window = static_cast<std::size_t>(get_int(run, "window", 184));
    if (auto v = find_string(run, "first_origin")) c.first_origin = YearMonth::parse(*v);
    if (auto v = find_string(run, "last_origin")) c.last_origin = YearMonth::parse(*v);
    c.base_month = YearMonth::parse(get_string(run, "base_month", "2015-02"));
    c.cpi_id = get_string(run, "cpi", "CPI");
    if (auto v = find_string(run, "seed")) c.seed = static_cast<std::uint64_t>(to_integer(*v, "run.seed"));
    c.out_dir = resolve(base_dir, get_string(run, "out", "out"));
    c.workers = get_int(run, "workers", 1);
    if (auto v = find_string(run, "table_horizons")) c.table_horizons = parse_int_list(*v);

    const auto& nc = section_or_empty(tree, "nowcast");
    auto mcmc_from = [&](NowcastModelSpec& s) {
        s.mcmc.draws = get_int(nc, "draws", s.mcmc.draws);
        s.mcmc.burn_in = get_int(nc, "burn_in", s.mcmc.burn_in);
        s.mcmc.prior_coef_var = get_real(nc, "prior_coef_var", s.mcmc.prior_coef_var);
        s.max_lag = s.family == NowcastFamily::ARAIC ? get_int(nc, "max_lag", 6) : 1;
    };
    c.nowcast.family = parse_nowcast_family(get_string(nc, "fill_model", "RWD"));
    mcmc_from(c.nowcast);
    c.nowcast_window = static_cast<std::size_t>(get_int(nc, "window", 0));
    c.horse_race = get_bool(nc, "horse_race", false);
    for (const auto& f : to_list(get_string(nc, "race_models", "RWD,AR,ARAIC,BAR,BARSV,BARSVO"))) {
        NowcastModelSpec s;
        s.family = parse_nowcast_family(f);
        mcmc_from(s);
        c.race_models.push_back(s);
    }
    c.race_variables = to_list(get_string(nc, "race_variables", ""));

    const auto& ev = section_or_empty(tree, "evaluation");
    const auto dm = get_string(ev, "dm_variance", "HAC");
    if (dm == "HAC") {
        c.dm.variance = DmVariance::Hac;
    } else if (dm == "HLN") {
        c.dm.variance = DmVariance::Hln;
    } else {
        throw ConfigError(fmt::format("evaluation.dm_variance: unknown value '{}'", dm));
    }
    c.mcs.replications = get_int(ev, "mcs_replications", 10000);
    c.mcs.block = get_int(ev, "mcs_block", 6);
    if (auto v = find_string(ev, "mcs_alphas")) {
        c.mcs.alphas.clear();
        for (const auto& a : to_list(*v)) c.mcs.alphas.push_back(to_real(a, "evaluation.mcs_alphas"));
    }
    const auto stat = get_string(ev, "mcs_statistic", "TMax");
    if (stat == "TMax") {
        c.mcs.statistic = McsStatistic::TMax;
    } else if (stat == "TRange") {
        c.mcs.statistic = McsStatistic::TRange;
    } else {
        throw ConfigError(fmt::format("evaluation.mcs_statistic: unknown value '{}'", stat));
    }
    c.cumpath_skip = static_cast<std::size_t>(get_int(ev, "cumpath_skip", 12));

    const auto& pool = section_or_empty(tree, "pooling");
    c.pooling = get_bool(pool, "enabled", true);
    c.pooling_spec.warmup = get_int(pool, "warmup", 12);
    c.pooling_spec.screen_window = get_int(pool, "screen_window", 12);
    c.pooling_spec.alpha = get_real(pool, "alpha", 0.25);
    c.pooling_spec.mcs = c.mcs;

    const auto& mf = section_or_empty(tree, "model_free");
    c.futures = get_bool(mf, "futures", true);
    c.survey = get_bool(mf, "survey", true);
    c.survey_deflate = get_bool(mf, "survey_deflate", true);

    for (const auto& [name, s] : tree) {
        if (name.rfind("model:", 0) != 0) continue;
        ModelSpec m;
        m.id = name.substr(6);
        m.family = parse_model_family(get_string(s, "family", ""));
        m.p = parse_lag(s, "p", m.id);
        m.s = parse_lag(s, "s", m.id);
        m.predictors = to_list(get_string(s, "predictors", ""));
        m.r = get_int(s, "r", 0);
        if (auto v = find_string(s, "endogenous")) m.endogenous = to_list(*v);
        m.restricted = get_bool(s, "restricted", false);
        m.iterated = get_bool(s, "iterated", false);
        m.factor_options.divide_by_n = get_bool(s, "factor_divide_by_n", true);
        c.models.push_back(std::move(m));
    }
    return c;
}

BacktestConfig load_config(const std::string& path) {
    auto dir = fs::path(path).parent_path().string();
    if (dir.empty()) dir = ".";
    return parse_config(csv::read_file(path), dir);
}

}  // namespace metalcast
