#include "metalcast/nowcast.hpp"

#include "metalcast/errors.hpp"
#include "metalcast/linalg.hpp"
#include "metalcast/parallel.hpp"
#include "metalcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace metalcast {

std::string_view display_name(NowcastFamily f) {
    switch (f) {
        case NowcastFamily::RWD: return "RW-D";
        case NowcastFamily::AR: return "AR(1)";
        case NowcastFamily::ARAIC: return "AR(AIC)";
        case NowcastFamily::BAR: return "BAR(1)";
        case NowcastFamily::BARSV: return "BAR(1)-SV";
        case NowcastFamily::BARSVO: return "BAR(1)-SVo";
    }
    return "?";
}

NowcastFamily parse_nowcast_family(std::string_view text) {
    if (text == "RWD") return NowcastFamily::RWD;
    if (text == "AR") return NowcastFamily::AR;
    if (text == "ARAIC") return NowcastFamily::ARAIC;
    if (text == "BAR") return NowcastFamily::BAR;
    if (text == "BARSV") return NowcastFamily::BARSV;
    if (text == "BARSVO") return NowcastFamily::BARSVO;
    throw ConfigError(fmt::format("unknown nowcast family '{}'", text));
}

void NowcastModelSpec::validate() const {
    if (max_lag < 1) throw ConfigError("nowcast max_lag must be >= 1");
    const bool bayes = family == NowcastFamily::BAR || family == NowcastFamily::BARSV ||
                       family == NowcastFamily::BARSVO;
    if (bayes && !(mcmc.burn_in >= 0 && mcmc.draws > mcmc.burn_in)) {
        throw ConfigError("MCMC config needs draws > burn_in >= 0");
    }
    if (bayes && !(mcmc.prior_coef_var > 0.0)) throw ConfigError("prior_coef_var must be positive");
}

double rwd_forecast(std::span<const double> history, int h) {
    if (history.size() < 2) throw InsufficientDataError("RW-D needs at least 2 observations");
    const double drift = (history.back() - history.front()) / static_cast<double>(history.size() - 1);
    return history.back() + h * drift;
}

std::vector<double> ArFit::forecast_path(std::span<const double> history, int horizons) const {
    const auto p = coefs.size();
    if (history.size() < p) throw InsufficientDataError("history shorter than the AR order");
    std::vector<double> buf(history.end() - static_cast<std::ptrdiff_t>(p), history.end());
    std::vector<double> out;
    for (int h = 0; h < horizons; ++h) {
        double f = intercept;
        for (std::size_t i = 0; i < p; ++i) f += coefs[i] * buf[buf.size() - 1 - i];
        out.push_back(f);
        buf.push_back(f);
    }
    return out;
}

ArFit ar_ols_fit_from(std::span<const double> history, int p, std::size_t skip) {
    if (p < 1) throw ConfigError("AR order must be >= 1");
    const auto up = static_cast<std::size_t>(p);
    if (history.size() < up + 10) {
        throw InsufficientDataError(fmt::format("AR({}) needs {} observations, got {}", p, up + 10, history.size()));
    }
    skip = std::max(skip, up);
    const auto n = static_cast<Eigen::Index>(history.size() - skip);
    Eigen::MatrixXd X(n, p + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto t = static_cast<std::size_t>(r) + skip;
        y(r) = history[t];
        X(r, 0) = 1.0;
        for (std::size_t i = 1; i <= up; ++i) X(r, static_cast<Eigen::Index>(i)) = history[t - i];
    }
    auto ls = least_squares(X, y);
    ArFit fit;
    fit.intercept = ls.coef(0);
    fit.coefs.assign(ls.coef.data() + 1, ls.coef.data() + ls.coef.size());
    fit.nobs = ls.nobs;
    fit.sigma2 = ls.sigma2_ml();
    fit.aic = static_cast<double>(n) * std::log(fit.sigma2) + 2.0 * (p + 1);
    return fit;
}

ArFit ar_ols_fit(std::span<const double> history, int p) {
    return ar_ols_fit_from(history, p, static_cast<std::size_t>(std::max(p, 0)));
}

int select_lag_aic(std::span<const double> history, int p_max) {
    if (p_max < 1) throw ConfigError("p_max must be >= 1");
    if (history.size() < static_cast<std::size_t>(p_max) + 10) {
        throw InsufficientDataError(fmt::format("AIC search up to {} lags needs {} observations", p_max, p_max + 10));
    }
    int best = 1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= p_max; ++p) {
        const double aic = ar_ols_fit_from(history, p, static_cast<std::size_t>(p_max)).aic;
        if (aic < best_aic) {
            best_aic = aic;
            best = p;
        }
    }
    return best;
}

std::vector<double> nowcast_path(std::span<const double> history, const NowcastModelSpec& spec, int horizons,
                                 std::uint64_t seed) {
    std::vector<double> out;
    switch (spec.family) {
        case NowcastFamily::RWD:
            for (int h = 1; h <= horizons; ++h) out.push_back(rwd_forecast(history, h));
            return out;
        case NowcastFamily::AR:
            return ar_ols_fit(history, spec.max_lag).forecast_path(history, horizons);
        case NowcastFamily::ARAIC:
            return ar_ols_fit(history, select_lag_aic(history, spec.max_lag)).forecast_path(history, horizons);
        default: break;
    }
    auto seeded = spec;
    seeded.mcmc.seed = seed;
    switch (spec.family) {
        case NowcastFamily::BAR: return bar_posterior(history, seeded, horizons).mean;
        case NowcastFamily::BARSV: return bar_sv_posterior(history, seeded, horizons).mean;
        default: return bar_svo_posterior(history, seeded, horizons).mean;
    }
}

namespace {

std::uint64_t task_seed(std::uint64_t root, std::string_view id, YearMonth as_of, NowcastFamily f) {
    return derive_seed(root, {stable_hash(id), static_cast<std::uint64_t>(as_of.index()),
                              static_cast<std::uint64_t>(f)});
}

std::span<const double> windowed(const MonthlySeries& s, std::size_t window) {
    std::span<const double> v = s.values;
    if (window > 0 && v.size() > window) v = v.subspan(v.size() - window);
    return v;
}

}  // namespace

Snapshot fill_missing_tail(const RealTimePanel& panel, YearMonth as_of, const NowcastModelSpec& model,
                           const NowcastOptions& options) {
    model.validate();
    Snapshot snap;
    snap.as_of = as_of;
    for (const auto& id : panel.ids()) {
        const auto& v = panel.vintage_at(id, as_of);
        const int missing = as_of - v.data.last();
        MonthlySeries filled = v.data;
        if (missing > 0) {
            try {
                auto path = nowcast_path(windowed(v.data, options.window), model, missing,
                                         task_seed(model.mcmc.seed, id, as_of, model.family));
                filled.values.insert(filled.values.end(), path.begin(), path.end());
            } catch (const Error& e) {
                throw NowcastFailure(id, e.what());
            }
        }
        snap.filled[id] = std::max(missing, 0);
        snap.series.emplace(id, std::move(filled));
    }
    return snap;
}

// ---------------------------------------------------------------------------
// Horse race

const NowcastCell* NowcastReport::find(std::string_view variable, int horizon, std::string_view model) const {
    for (const auto& c : cells) {
        if (c.variable == variable && c.horizon == horizon && c.model == model) return &c;
    }
    return nullptr;
}

std::string NowcastReport::to_csv() const {
    std::string out = "ID,Horizon";
    for (const auto& m : models) out += "," + m;
    out += "\n";
    for (const auto& v : variables) {
        for (int h = 1; h <= max_horizon; ++h) {
            out += fmt::format("{},{}", v, h);
            for (std::size_t k = 0; k < models.size(); ++k) {
                const auto* c = find(v, h, models[k]);
                if (c == nullptr) {
                    out += ",-";
                } else if (k == 0) {
                    out += fmt::format(",{:.2f}", c->rmsfe);
                } else {
                    out += "," + format_ratio(c->ratio, c->dm, 2);
                }
            }
            out += "\n";
        }
    }
    return out;
}

std::string NowcastReport::to_json() const {
    nlohmann::ordered_json j;
    j["models"] = models;
    j["variables"] = variables;
    j["max_horizon"] = max_horizon;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
        nlohmann::ordered_json e;
        e["variable"] = c.variable;
        e["horizon"] = c.horizon;
        e["model"] = c.model;
        e["rmsfe"] = c.rmsfe;
        e["ratio"] = c.ratio;
        e["n"] = c.n;
        if (c.dm) {
            e["dm_statistic"] = c.dm->statistic;
            e["stars"] = std::string(stars(c.dm->level));
        }
        arr.push_back(std::move(e));
    }
    j["cells"] = std::move(arr);
    return j.dump(2) + "\n";
}

NowcastReport nowcast_horse_race(const RealTimePanel& panel, const std::vector<NowcastModelSpec>& models,
                                 const HorseRaceConfig& config) {
    if (models.empty() || models.front().family != NowcastFamily::RWD) {
        throw ConfigError("horse race needs RW-D as the first model");
    }
    for (const auto& m : models) m.validate();
    if (config.last_vintage - config.first_vintage + 1 < 24) {
        throw ConfigError("horse race needs at least 24 evaluation vintages");
    }
    NowcastReport report;
    for (const auto& m : models) report.models.emplace_back(display_name(m.family));

    auto vars = config.variables;
    if (vars.empty()) {
        for (const auto& id : panel.ids()) {
            if (panel.meta(id).publication_lag > 0) vars.push_back(id);
        }
    }
    report.variables = vars;
    for (const auto& v : vars) report.max_horizon = std::max(report.max_horizon, panel.meta(v).publication_lag);

    const auto n_vint = static_cast<std::size_t>(config.last_vintage - config.first_vintage + 1);
    const std::size_t n_models = models.size();
    // errors[var][vintage][model][h-1]
    using Slot = std::vector<std::vector<std::optional<double>>>;
    std::vector<std::vector<Slot>> errors(vars.size(), std::vector<Slot>(n_vint));

    parallel_for(vars.size() * n_vint, config.workers, [&](std::size_t task) {
        const auto vi = task / n_vint;
        const auto ti = task % n_vint;
        const auto& id = vars[vi];
        const auto as_of = config.first_vintage + static_cast<int>(ti);
        const int lag = panel.meta(id).publication_lag;
        auto& slot = errors[vi][ti];
        slot.assign(n_models, std::vector<std::optional<double>>(static_cast<std::size_t>(lag)));
        const Vintage* v = nullptr;
        try {
            v = &panel.vintage_at(id, as_of);
        } catch (const MissingVintageError&) {
            return;
        }
        const auto& truth = panel.first_release(id);
        const int missing = as_of - v->data.last();
        if (missing <= 0) return;
        for (std::size_t m = 0; m < n_models; ++m) {
            std::vector<double> path;
            try {
                path = nowcast_path(windowed(v->data, config.window), models[m], missing,
                                    task_seed(models[m].mcmc.seed, id, as_of, models[m].family));
            } catch (const Error&) {
                continue;
            }
            for (int h = 1; h <= std::min(missing, lag); ++h) {
                if (auto actual = truth.find(v->data.last() + h)) {
                    slot[m][static_cast<std::size_t>(h - 1)] = path[static_cast<std::size_t>(h - 1)] - *actual;
                }
            }
        }
    });

    for (std::size_t vi = 0; vi < vars.size(); ++vi) {
        const int lag = panel.meta(vars[vi]).publication_lag;
        for (int h = 1; h <= lag; ++h) {
            const auto hi = static_cast<std::size_t>(h - 1);
            std::vector<std::vector<double>> errs(n_models);
            for (std::size_t ti = 0; ti < n_vint; ++ti) {
                const auto& slot = errors[vi][ti];
                if (slot.empty()) continue;
                bool complete = true;
                for (std::size_t m = 0; m < n_models; ++m) complete = complete && slot[m][hi].has_value();
                if (!complete) continue;
                for (std::size_t m = 0; m < n_models; ++m) errs[m].push_back(*slot[m][hi]);
            }
            if (errs.front().empty()) continue;
            const double base = rmsfe(errs.front());
            std::vector<double> base_sq;
            for (double e : errs.front()) base_sq.push_back(e * e);
            for (std::size_t m = 0; m < n_models; ++m) {
                NowcastCell cell;
                cell.variable = vars[vi];
                cell.horizon = h;
                cell.model = report.models[m];
                cell.n = errs[m].size();
                cell.rmsfe = rmsfe(errs[m]);
                cell.ratio = m == 0 ? 1.0 : cell.rmsfe / base;
                if (m > 0) {
                    std::vector<double> sq;
                    for (double e : errs[m]) sq.push_back(e * e);
                    try {
                        cell.dm = dm_test(sq, base_sq, h, config.dm);
                    } catch (const Error&) {
                    }
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

}  // namespace metalcast
