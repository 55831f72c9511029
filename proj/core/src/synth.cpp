#include "metalcast/synth.hpp"

#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"
#include "metalcast/rng.hpp"

#include <cmath>
#include <filesystem>
#include <random>

#include <fmt/format.h>

namespace metalcast {

namespace {

constexpr Metal kAllMetals[] = {Metal::Aluminum, Metal::Copper, Metal::Nickel, Metal::Zinc};

double initial_price(Metal m) {
    switch (m) {
        case Metal::Aluminum: return 1600.0;
        case Metal::Copper: return 2000.0;
        case Metal::Nickel: return 5000.0;
        case Metal::Zinc: return 1100.0;
    }
    return 1000.0;
}

SynthVariable var(std::string id, Group g, Transform t, int lag, SynthDgp dgp, double rho, double scale) {
    SynthVariable v;
    v.meta.id = std::move(id);
    v.meta.group = g;
    v.meta.transform = t;
    v.meta.publication_lag = lag;
    v.dgp = dgp;
    v.persistence = rho;
    v.scale = scale;
    return v;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::vector<SynthVariable> default_synth_variables() {
    using enum Group;
    using enum Transform;
    const auto F = SynthDgp::Factor;
    const auto A = SynthDgp::AR;
    return {
        var("IP", EcAct, DLog, 2, F, 0.3, 0.006),
        var("CPI", Prices, D2Log, 2, F, 0.5, 0.0015),
        var("NO-M", EcAct, Log, 2, F, 0.8, 0.06),
        var("NO-A", EcAct, Log, 2, F, 0.8, 0.06),
        var("HEM", EcAct, Log, 2, F, 0.7, 0.01),
        var("MVS", ET, Log, 3, F, 0.7, 0.08),
        var("CU-P", CU, Log, 2, F, 0.8, 0.03),
        var("CU-M", CU, Log, 2, F, 0.8, 0.04),
        var("PPI-M", Prices, DLog, 2, F, 0.4, 0.012),
        var("PPI-B", ET, DLog, 2, A, 0.3, 0.008),
        var("AUS", ExRates, DLog, 2, F, 0.2, 0.02),
        var("CHL", ExRates, DLog, 2, F, 0.2, 0.02),
        var("CHN", ExRates, DLog, 2, A, 0.2, 0.01),
        var("IDN", ExRates, DLog, 2, A, 0.2, 0.02),
        var("PER", ExRates, DLog, 2, F, 0.2, 0.015),
        var("PHL", ExRates, DLog, 2, A, 0.2, 0.012),
        var("RUS", ExRates, DLog, 2, F, 0.2, 0.03),
    };
}

SynthData generate_synth(const SynthSpec& spec) {
    if (spec.factors < 1) throw ConfigError("synthetic panel needs at least one factor");
    if (spec.last_vintage < spec.first_vintage || spec.first_vintage <= spec.start) {
        throw ConfigError("synthetic vintage range must follow the data start");
    }
    Rng rng(derive_seed(spec.seed, {1}));
    std::normal_distribution<double> z;
    constexpr int kBurn = 60;
    const int n = spec.last_vintage - spec.start + 1;
    const int total = n + kBurn;
    const int r = spec.factors;

    // Common factors.
    std::vector<std::vector<double>> f(static_cast<std::size_t>(total), std::vector<double>(static_cast<std::size_t>(r)));
    const double innov = std::sqrt(1.0 - spec.factor_persistence * spec.factor_persistence);
    for (int t = 1; t < total; ++t) {
        for (int k = 0; k < r; ++k) {
            f[t][k] = spec.factor_persistence * f[t - 1][k] + innov * z(rng);
        }
    }

    SynthData out;
    auto push = [&](SeriesMeta meta, std::vector<double> full) {
        MonthlySeries s;
        s.start = spec.start;
        s.values.assign(full.end() - n, full.end());
        out.metas.push_back(std::move(meta));
        out.levels.push_back(std::move(s));
    };

    std::vector<double> cpi_full;
    for (const auto& v : spec.variables) {
        std::vector<double> lambda(static_cast<std::size_t>(r));
        for (auto& l : lambda) l = 0.7 * z(rng);
        const double rho = v.persistence;
        const double e_scale = std::sqrt(1.0 - rho * rho) * (v.dgp == SynthDgp::Factor ? 0.6 : 1.0);
        std::vector<double> x(static_cast<std::size_t>(total));
        double u = 0.0;
        for (int t = 0; t < total; ++t) {
            u = rho * u + e_scale * z(rng);
            double common = 0.0;
            if (v.dgp == SynthDgp::Factor) {
                for (int k = 0; k < r; ++k) common += lambda[k] * f[t][k];
            }
            x[t] = common + u;
        }
        std::vector<double> level(static_cast<std::size_t>(total));
        double log_level = std::log(100.0);
        for (int t = 0; t < total; ++t) {
            switch (v.meta.transform) {
                case Transform::DLog:
                    log_level += 0.001 + v.scale * x[t];
                    level[t] = std::exp(log_level);
                    break;
                case Transform::D2Log:
                    log_level += 0.002 + v.scale * x[t];
                    level[t] = std::exp(log_level);
                    break;
                case Transform::Log:
                    level[t] = 100.0 * std::exp(v.scale * x[t]);
                    break;
                case Transform::None:
                    level[t] = 100.0 + 10.0 * v.scale * x[t];
                    break;
            }
        }
        if (v.meta.id == "CPI") cpi_full = level;
        push(v.meta, std::move(level));
    }
    if (cpi_full.empty()) throw ConfigError("synthetic panel needs a CPI variable");

    // Metals block.
    const std::size_t M = std::size(kAllMetals);
    std::vector<std::vector<double>> b(M, std::vector<double>(static_cast<std::size_t>(r)));
    for (auto& row : b) {
        for (auto& v : row) v = spec.price_factor_loading * (1.0 + 0.5 * z(rng)) * (z(rng) < 0 ? -1.0 : 1.0);
    }
    std::vector<std::vector<double>> g(M, std::vector<double>(static_cast<std::size_t>(total)));
    std::vector<std::vector<double>> inv(M, std::vector<double>(static_cast<std::size_t>(total)));
    for (int t = 1; t < total; ++t) {
        const double common = z(rng);
        for (std::size_t m = 0; m < M; ++m) {
            double drive = 0.0;
            for (int k = 0; k < r; ++k) drive += b[m][k] * f[t - 1][k];
            g[m][t] = spec.price_own_lag * g[m][t - 1] + drive - 0.1 * inv[m][t - 1] +
                      spec.price_volatility * (0.6 * common + 0.8 * z(rng));
            inv[m][t] = 0.3 * inv[m][t - 1] - 0.4 * g[m][t - 1] + spec.inventory_volatility * z(rng);
        }
    }
    std::vector<std::vector<double>> nominal(M);
    for (std::size_t m = 0; m < M; ++m) {
        const auto metal = kAllMetals[m];
        std::vector<double> price(static_cast<std::size_t>(total));
        std::vector<double> stock(static_cast<std::size_t>(total));
        double lp = std::log(initial_price(metal));
        double ls = std::log(1000.0);
        for (int t = 0; t < total; ++t) {
            lp += g[m][t];
            ls += inv[m][t];
            price[t] = std::exp(lp) * cpi_full[t] / 100.0;
            stock[t] = std::exp(ls);
        }
        nominal[m] = price;
        SeriesMeta pm;
        pm.id = price_id(metal);
        pm.group = Group::Target;
        pm.transform = Transform::DLog;
        push(pm, std::move(price));
        SeriesMeta im;
        im.id = inventory_id(metal);
        im.group = Group::Inventories;
        im.transform = Transform::DLog;
        push(im, std::move(stock));
    }

    // Model-free quotes for every vintage month.
    Rng qrng(derive_seed(spec.seed, {2}));
    for (auto d = spec.first_vintage; d <= spec.last_vintage; d += 1) {
        const auto t = static_cast<std::size_t>(d - spec.start + kBurn);
        for (std::size_t m = 0; m < M; ++m) {
            const double p = nominal[m][t];
            if (spec.futures) {
                for (int mat : kFuturesMaturities) {
                    const double center = p * std::exp(0.002 * mat + 0.02 * z(qrng));
                    for (int day = 0; day < 2; ++day) {
                        out.futures.push_back({kAllMetals[m], d, mat, center * (1.0 + (day == 0 ? -0.001 : 0.001))});
                    }
                }
            }
            if (spec.survey) {
                FixedEventSurvey s;
                s.survey_date = d;
                for (int k = 1; k <= 24; ++k) {
                    const auto e = d + k;
                    if (e.month() % 3 != 0) continue;
                    s.events.push_back({e, p * std::exp(0.0015 * k + 0.03 * z(qrng))});
                }
                out.surveys[kAllMetals[m]].push_back(std::move(s));
            }
        }
    }
    return out;
}

RealTimePanel synth_panel(const SynthSpec& spec, const SynthData& data) {
    RealTimePanel panel;
    for (std::size_t i = 0; i < data.metas.size(); ++i) {
        const auto& meta = data.metas[i];
        panel.add(meta, vintages_from_series(data.levels[i], meta.publication_lag, spec.first_vintage, spec.last_vintage));
    }
    return panel;
}

std::string default_backtest_ini(const SynthSpec& spec, std::uint64_t seed) {
    const auto first = spec.first_vintage + 27;
    const auto last = first + 59;
    std::string out = fmt::format(
        "[run]\n"
        "manifest = manifest.ini\n"
        "metals = Copper, Aluminum, Nickel, Zinc\n"
        "horizons = 1-24\n"
        "window = 184\n"
        "first_origin = {}\n"
        "last_origin = {}\n"
        "base_month = 2015-02\n"
        "seed = {}\n"
        "out = out\n"
        "\n"
        "[nowcast]\n"
        "fill_model = BARSV\n"
        "draws = 500\n"
        "burn_in = 250\n"
        "window = 120\n"
        "horse_race = false\n"
        "\n"
        "[evaluation]\n"
        "dm_variance = HAC\n"
        "mcs_replications = 2000\n"
        "mcs_block = 6\n"
        "mcs_alphas = 0.10, 0.25\n"
        "cumpath_skip = 12\n"
        "\n"
        "[pooling]\n"
        "enabled = true\n"
        "warmup = 12\n"
        "screen_window = 12\n"
        "alpha = 0.25\n"
        "\n"
        "[model_free]\n"
        "futures = true\n"
        "survey = true\n"
        "survey_deflate = true\n",
        first.str(), last.str(), seed);
    out +=
        "\n[model:RW-D]\nfamily = RWD\n"
        "\n[model:AR1]\nfamily = AR\np = 1\n"
        "\n[model:AR-AIC]\nfamily = AR\np = AIC\np_max = 6\n"
        "\n[model:ARDL-IP]\nfamily = ARDL\np = 1\ns = 1\npredictors = IP\n"
        "\n[model:ARDL-AIC-NO-M]\nfamily = ARDL\np = AIC\ns = AIC\np_max = 3\ns_max = 3\npredictors = NO-M\n"
        "\n[model:ARDL-EcAct]\nfamily = ARDL\np = 1\ns = 1\npredictors = EcAct\n"
        "\n[model:ARDL-ETM]\nfamily = ARDL\np = 1\ns = 1\npredictors = Target\n"
        "\n[model:ARDL-Inventories]\nfamily = ARDL\np = 1\ns = 1\npredictors = Inventories\n"
        "\n[model:VAR1]\nfamily = VAR\np = 1\nendogenous = price, inventory, NO-M\n"
        "\n[model:ARDI-1F]\nfamily = ARDI\np = 1\ns = 1\nr = 1\n"
        "\n[model:ARDI-AIC-2F]\nfamily = ARDI\np = AIC\ns = AIC\np_max = 3\ns_max = 3\nr = 2\n"
        "\n[model:FAVAR-1F]\nfamily = FAVAR\np = 1\nr = 1\nendogenous = price, inventory, NO-M\n"
        "\n[model:FAVAR-2F]\nfamily = FAVAR\np = 1\nr = 2\nendogenous = price, inventory, NO-M\n";
    return out;
}

void write_synth(const SynthSpec& spec, const SynthData& data, const std::string& dir, std::uint64_t seed) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir, ec.message()));
    auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };

    std::string manifest = fmt::format("[panel]\nfirst_vintage = {}\n", spec.first_vintage.str());
    for (std::size_t i = 0; i < data.metas.size(); ++i) {
        const auto& meta = data.metas[i];
        const auto& s = data.levels[i];
        const auto file = meta.id + ".csv";
        std::string content;
        const bool vintage_layout = meta.publication_lag > 0;
        if (vintage_layout) {
            content = "obs_date";
            for (auto v = spec.first_vintage; v <= spec.last_vintage; v += 1) content += "," + v.str();
            content += "\n";
            for (std::size_t t = 0; t < s.size(); ++t) {
                const auto date = s.start + static_cast<int>(t);
                if (date > spec.last_vintage - meta.publication_lag) break;
                content += date.str();
                for (auto v = spec.first_vintage; v <= spec.last_vintage; v += 1) {
                    content += date <= v - meta.publication_lag ? fmt::format(",{}", s.values[t]) : std::string(",");
                }
                content += "\n";
            }
        } else {
            content = "obs_date,value\n";
            for (std::size_t t = 0; t < s.size(); ++t) {
                content += fmt::format("{},{}\n", (s.start + static_cast<int>(t)).str(), s.values[t]);
            }
        }
        csv::write_file(path(file), content);
        manifest += fmt::format("\n[{}]\nfile = {}\nlayout = {}\ntransform = {}\ngroup = {}\npublication_lag = {}\n",
                                meta.id, file, vintage_layout ? "vintages" : "series", to_string(meta.transform),
                                to_string(meta.group), meta.publication_lag);
    }

    manifest += "\n[model_free]\n";
    if (!data.futures.empty()) {
        std::string content = "metal,quote_date,maturity_months,price\n";
        for (std::size_t i = 0; i < data.futures.size(); ++i) {
            const auto& q = data.futures[i];
            // Two quotes per month, dated on the 5th and the 20th.
            const int day = i % 2 == 0 ? 5 : 20;
            content += fmt::format("{},{}-{:02d},{},{}\n", to_string(q.metal), q.quote_date.str(), day, q.maturity, q.price);
        }
        csv::write_file(path("futures.csv"), content);
        manifest += "futures = futures.csv\n";
    }
    for (const auto& [metal, surveys] : data.surveys) {
        std::string content = "survey_date,event_date,mean_forecast\n";
        for (const auto& s : surveys) {
            for (const auto& e : s.events) {
                content += fmt::format("{},{},{}\n", s.survey_date.str(), e.event_date.str(), e.mean_forecast);
            }
        }
        const auto file = fmt::format("survey_{}.csv", lower(to_string(metal)));
        csv::write_file(path(file), content);
        manifest += fmt::format("survey_{} = {}\n", to_string(metal), file);
    }
    csv::write_file(path("manifest.ini"), manifest);
    csv::write_file(path("backtest.ini"), default_backtest_ini(spec, seed));
}

RealTimePanel ar1_panel(std::uint64_t seed, double phi, double sigma, int T, int lag, int vintages,
                        const std::string& id) {
    if (T < 2 || vintages < 1 || vintages + lag > T || lag < 0) throw ConfigError("invalid AR(1) panel dimensions");
    Rng rng(seed);
    std::normal_distribution<double> z;
    MonthlySeries s;
    s.start = YearMonth(2000, 1);
    s.values.resize(static_cast<std::size_t>(T));
    double y = sigma * z(rng) / std::sqrt(std::max(1e-12, 1.0 - phi * phi));
    for (auto& v : s.values) {
        y = phi * y + sigma * z(rng);
        v = y;
    }
    SeriesMeta meta;
    meta.id = id;
    meta.publication_lag = lag;
    const auto last = s.last() + lag;
    RealTimePanel panel;
    panel.add(meta, vintages_from_series(s, lag, last - (vintages - 1), last));
    return panel;
}

}  // namespace metalcast
