#include "metalcast/forecast_models.hpp"

#include "metalcast/errors.hpp"
#include "metalcast/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace metalcast {

std::string_view to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::RWD: return "RWD";
        case ModelFamily::AR: return "AR";
        case ModelFamily::ARDL: return "ARDL";
        case ModelFamily::ARDI: return "ARDI";
        case ModelFamily::VAR: return "VAR";
        case ModelFamily::FAVAR: return "FAVAR";
    }
    return "?";
}

ModelFamily parse_model_family(std::string_view text) {
    for (auto f : {ModelFamily::RWD, ModelFamily::AR, ModelFamily::ARDL, ModelFamily::ARDI, ModelFamily::VAR,
                   ModelFamily::FAVAR}) {
        if (text == to_string(f)) return f;
    }
    throw ConfigError(fmt::format("unknown model family '{}'", text));
}

void ModelSpec::validate() const {
    if (id.empty()) throw ConfigError("model id must not be empty");
    auto check_lag = [&](const LagOrder& l, const char* name) {
        if (l.aic ? l.max < 1 : l.value < 1) throw ConfigError(fmt::format("{}: {} must be >= 1", id, name));
    };
    switch (family) {
        case ModelFamily::RWD: break;
        case ModelFamily::AR: check_lag(p, "p"); break;
        case ModelFamily::ARDL:
            check_lag(p, "p");
            check_lag(s, "s");
            if (predictors.empty()) throw ConfigError(fmt::format("{}: ARDL needs predictors", id));
            break;
        case ModelFamily::ARDI:
            check_lag(p, "p");
            check_lag(s, "s");
            if (r < 0) throw ConfigError(fmt::format("{}: r must be >= 0", id));
            break;
        case ModelFamily::FAVAR:
            if (r < 1) throw ConfigError(fmt::format("{}: FAVAR needs r >= 1", id));
            [[fallthrough]];
        case ModelFamily::VAR:
            check_lag(p, "p");
            if (std::find(endogenous.begin(), endogenous.end(), "price") == endogenous.end()) {
                throw ConfigError(fmt::format("{}: endogenous set must contain 'price'", id));
            }
            if (iterated && p.aic) throw ConfigError(fmt::format("{}: iterated VAR needs a fixed p", id));
            break;
    }
}

ForecastContext make_context(const Snapshot& snapshot, const RealTimePanel& panel, Metal metal, std::size_t window,
                             YearMonth base_month, const std::string& cpi_id) {
    auto cpi_it = snapshot.series.find(cpi_id);
    if (cpi_it == snapshot.series.end()) throw CoverageError(fmt::format("snapshot has no '{}' series", cpi_id));
    const auto& cpi = cpi_it->second;

    ForecastContext ctx;
    ctx.metal = metal;
    ctx.origin = snapshot.as_of;
    ctx.window = window;
    bool found = false;
    for (const auto& id : panel.ids()) {
        const auto& meta = panel.meta(id);
        const auto& levels = snapshot.series.at(id);
        if (meta.group == Group::Target) {
            const Metal m = [&] {
                for (auto c : {Metal::Aluminum, Metal::Copper, Metal::Nickel, Metal::Zinc}) {
                    if (price_id(c) == id) return c;
                }
                throw ConfigError(fmt::format("target series '{}' is not a metal price id", id));
            }();
            auto real = deflate_nominal(m, levels, cpi, base_month);
            if (m == metal) {
                ctx.real_price = real.values;
                ctx.growth = apply_transform(real.values, Transform::DLog);
                found = true;
            } else {
                ctx.predictors.emplace(id, apply_transform(real.values, Transform::DLog));
                ctx.groups.emplace(id, Group::Target);
            }
        } else {
            ctx.predictors.emplace(id, apply_transform(levels, meta.transform));
            ctx.groups.emplace(id, meta.group);
        }
    }
    if (!found) throw CoverageError(fmt::format("panel has no price series '{}'", price_id(metal)));
    return ctx;
}

std::vector<std::string> resolve_predictors(const ForecastContext& ctx, const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    auto add = [&](const std::string& id) {
        if (id == ctx.target_id()) return;
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    };
    for (const auto& token : tokens) {
        if (ctx.predictors.count(token) != 0) {
            add(token);
            continue;
        }
        std::optional<Group> group;
        try {
            group = parse_group(token);
        } catch (const ConfigError&) {
            if (token == ctx.target_id()) continue;
            throw ConfigError(fmt::format("unknown predictor '{}'", token));
        }
        // ctx.groups is keyed by id, so iterate the map for a deterministic order.
        for (const auto& [id, g] : ctx.groups) {
            if (g == *group) add(id);
        }
    }
    return out;
}

DirectProjection direct_projection_fit(std::span<const double> y, const Eigen::MatrixXd& X, int h) {
    if (h < 1) throw ConfigError("horizon must be >= 1");
    if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw DimensionError("y and X differ in length");
    const auto k = X.cols() + 1;
    const auto n = X.rows() - h;
    if (n < k + 10) {
        throw InsufficientDataError(fmt::format("direct projection h={} needs {} aligned rows, got {}", h, k + 10,
                                                std::max<Eigen::Index>(n, 0)));
    }
    Eigen::MatrixXd Z(n, k);
    Z.col(0).setOnes();
    Z.rightCols(k - 1) = X.topRows(n);
    Eigen::VectorXd target(n);
    for (Eigen::Index t = 0; t < n; ++t) target(t) = y[static_cast<std::size_t>(t + h)];
    auto ls = least_squares(Z, target);
    DirectProjection d;
    d.horizon = h;
    d.intercept = ls.coef(0);
    d.coef = ls.coef.tail(k - 1);
    d.nobs = ls.nobs;
    d.sigma2 = ls.sigma2_ml();
    d.aic = static_cast<double>(n) * std::log(d.sigma2) + 2.0 * static_cast<double>(k);
    return d;
}

Eigen::MatrixXd lag_design(const std::vector<std::span<const double>>& series, const std::vector<int>& lags,
                           std::size_t first_row) {
    if (series.size() != lags.size()) throw DimensionError("one lag order per series required");
    std::size_t len = series.empty() ? 0 : series.front().size();
    Eigen::Index cols = 0;
    for (std::size_t b = 0; b < series.size(); ++b) {
        if (series[b].size() != len) throw DimensionError("lag_design series differ in length");
        if (lags[b] < 1) throw ConfigError("lag order must be >= 1");
        if (static_cast<std::size_t>(lags[b]) > first_row + 1) throw DimensionError("first_row too small for lags");
        cols += lags[b];
    }
    const auto rows = static_cast<Eigen::Index>(len > first_row ? len - first_row : 0);
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto t = first_row + static_cast<std::size_t>(r);
        Eigen::Index c = 0;
        for (std::size_t b = 0; b < series.size(); ++b) {
            for (int l = 0; l < lags[b]; ++l) X(r, c++) = series[b][t - static_cast<std::size_t>(l)];
        }
    }
    return X;
}

Eigen::MatrixXd var_direct_fit(const Eigen::MatrixXd& Y, int p, int h) {
    if (p < 1) throw ConfigError("VAR lag order must be >= 1");
    const auto n = Y.cols();
    std::vector<Eigen::VectorXd> cols(static_cast<std::size_t>(n));
    std::vector<std::span<const double>> series;
    for (Eigen::Index k = 0; k < n; ++k) {
        cols[static_cast<std::size_t>(k)] = Y.col(k);
        series.emplace_back(cols[static_cast<std::size_t>(k)].data(), static_cast<std::size_t>(Y.rows()));
    }
    const auto first = static_cast<std::size_t>(p - 1);
    const auto X = lag_design(series, std::vector<int>(static_cast<std::size_t>(n), p), first);
    Eigen::MatrixXd coef(1 + n * p, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        try {
            auto fit = direct_projection_fit(series[static_cast<std::size_t>(k)].subspan(first), X, h);
            coef(0, k) = fit.intercept;
            coef.col(k).tail(n * p) = fit.coef;
        } catch (const InsufficientDataError& e) {
            throw InsufficientDataError(fmt::format("VAR equation {}: {}", k + 1, e.what()));
        } catch (const RankError& e) {
            throw RankError(fmt::format("VAR equation {}: {}", k + 1, e.what()));
        }
    }
    return coef;
}

double reconstruct_level(double origin_price, std::span<const double> growth, int h) {
    if (h < 1) throw ConfigError("horizon must be >= 1");
    if (growth.size() < static_cast<std::size_t>(h)) {
        throw IncompleteFanError(fmt::format("fan has {} horizons, need {}", growth.size(), h));
    }
    double sum = 0.0;
    for (int j = 0; j < h; ++j) {
        const double g = growth[static_cast<std::size_t>(j)];
        if (!std::isfinite(g)) throw IncompleteFanError(fmt::format("growth forecast at horizon {} is missing", j + 1));
        sum += g;
    }
    return origin_price * std::exp(sum);
}

namespace {

std::vector<double> window_values(const MonthlySeries& s, YearMonth origin, std::size_t W, std::string_view id) {
    const YearMonth from = origin - static_cast<int>(W) + 1;
    if (!s.contains(from) || !s.contains(origin)) {
        throw CoverageError(fmt::format("{} does not cover the window {}..{}", id, from.str(), origin.str()));
    }
    const auto begin = s.values.begin() + (from - s.start);
    return {begin, begin + static_cast<std::ptrdiff_t>(W)};
}

// Regressor blocks of one model at one origin. Blocks flagged `own` use the p
// lag order, the others use s; block 0 is the forecast target.
struct Prepared {
    std::vector<std::vector<double>> series;
    std::vector<bool> own;
    LagOrder p;
    LagOrder s;
    bool iterated = false;
};

std::vector<int> lag_vector(const Prepared& prep, int p, int s) {
    std::vector<int> lags;
    for (bool o : prep.own) lags.push_back(o ? p : s);
    return lags;
}

std::vector<std::span<const double>> spans(const Prepared& prep) {
    return {prep.series.begin(), prep.series.end()};
}

bool has_other(const Prepared& prep) { return std::find(prep.own.begin(), prep.own.end(), false) != prep.own.end(); }

// Picks (p, s) by AIC on the common sample using cross products of the
// largest design; only the winner is refit by QR.
std::pair<int, int> choose_lags(const Prepared& prep, int h) {
    if (!prep.p.aic && !(prep.s.aic && has_other(prep))) return {prep.p.value, prep.s.value};
    std::vector<int> prange, srange;
    if (prep.p.aic) {
        for (int v = 1; v <= prep.p.max; ++v) prange.push_back(v);
    } else {
        prange.push_back(prep.p.value);
    }
    if (!has_other(prep)) {
        srange.push_back(1);
    } else if (prep.s.aic) {
        for (int v = 1; v <= prep.s.max; ++v) srange.push_back(v);
    } else {
        srange.push_back(prep.s.value);
    }
    const int lp = prange.back();
    const int ls = srange.back();
    const auto lags = lag_vector(prep, lp, ls);
    const int lmax = *std::max_element(lags.begin(), lags.end());
    const auto first = static_cast<std::size_t>(lmax - 1);
    const auto X = lag_design(spans(prep), lags, first);
    const auto n = X.rows() - h;
    if (n <= 0) throw InsufficientDataError("window too short for the AIC grid");
    Eigen::MatrixXd Z(n, X.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(X.cols()) = X.topRows(n);
    Eigen::VectorXd y(n);
    for (Eigen::Index t = 0; t < n; ++t) y(t) = prep.series[0][first + static_cast<std::size_t>(t + h)];
    const Eigen::MatrixXd G = Z.transpose() * Z;
    const Eigen::VectorXd b = Z.transpose() * y;
    const double yy = y.squaredNorm();

    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> choice{-1, -1};
    for (int p : prange) {
        for (int s : srange) {
            std::vector<Eigen::Index> idx{0};
            Eigen::Index offset = 1;
            for (std::size_t blk = 0; blk < prep.own.size(); ++blk) {
                const int use = prep.own[blk] ? p : s;
                for (int l = 0; l < use; ++l) idx.push_back(offset + l);
                offset += lags[blk];
            }
            const auto k = static_cast<Eigen::Index>(idx.size());
            if (n < k + 10) continue;
            Eigen::MatrixXd Gs(k, k);
            Eigen::VectorXd bs(k);
            for (Eigen::Index i = 0; i < k; ++i) {
                bs(i) = b(idx[static_cast<std::size_t>(i)]);
                for (Eigen::Index j = 0; j < k; ++j) Gs(i, j) = G(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
            }
            Eigen::LDLT<Eigen::MatrixXd> ldlt(Gs);
            if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 1e-12 * Gs.diagonal().maxCoeff()).all()) continue;
            const Eigen::VectorXd beta = ldlt.solve(bs);
            const double ssr = std::max(yy - beta.dot(bs), std::numeric_limits<double>::min());
            const double aic = static_cast<double>(n) * std::log(ssr / static_cast<double>(n)) + 2.0 * static_cast<double>(k);
            if (aic < best) {
                best = aic;
                choice = {p, s};
            }
        }
    }
    if (choice.first < 0) throw InsufficientDataError("no AIC candidate can be estimated on this window");
    return choice;
}

double predict_direct(const Prepared& prep, int h) {
    const auto [p, s] = choose_lags(prep, h);
    const auto lags = lag_vector(prep, p, s);
    const int lmax = *std::max_element(lags.begin(), lags.end());
    const auto first = static_cast<std::size_t>(lmax - 1);
    const auto X = lag_design(spans(prep), lags, first);
    const auto fit = direct_projection_fit(std::span<const double>(prep.series[0]).subspan(first), X, h);
    return fit.predict(X.row(X.rows() - 1));
}

std::vector<double> iterate_var(const Prepared& prep, int max_h) {
    const int p = prep.p.value;
    const auto n = static_cast<Eigen::Index>(prep.series.size());
    const auto W = static_cast<Eigen::Index>(prep.series[0].size());
    Eigen::MatrixXd Y(W, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Y.col(k) = Eigen::Map<const Eigen::VectorXd>(prep.series[static_cast<std::size_t>(k)].data(), W);
    }
    const auto coef = var_direct_fit(Y, p, 1);
    // hist holds the latest observations, newest last.
    std::vector<Eigen::RowVectorXd> hist;
    for (Eigen::Index t = W - p; t < W; ++t) hist.push_back(Y.row(t));
    std::vector<double> out;
    for (int h = 1; h <= max_h; ++h) {
        Eigen::RowVectorXd x(n * p);
        Eigen::Index c = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            for (int l = 0; l < p; ++l) x(c++) = hist[hist.size() - 1 - static_cast<std::size_t>(l)](k);
        }
        Eigen::RowVectorXd next = coef.row(0) + x * coef.bottomRows(n * p);
        out.push_back(next(0));
        hist.push_back(next);
    }
    return out;
}

std::vector<std::vector<double>> factor_blocks(const ForecastContext& ctx, const std::vector<std::string>& exclude,
                                               int r, const FactorOptions& options) {
    std::vector<std::string> ids;
    for (const auto& [id, g] : ctx.predictors) {
        if (id != ctx.target_id()) ids.push_back(id);
    }
    Eigen::MatrixXd data(static_cast<Eigen::Index>(ctx.window), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t j = 0; j < ids.size(); ++j) {
        const auto v = window_values(ctx.predictors.at(ids[j]), ctx.origin, ctx.window, ids[j]);
        data.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    const auto fm = extract_factors(standardize_panel(data, ids, exclude), r, options);
    std::vector<std::vector<double>> out;
    for (Eigen::Index k = 0; k < fm.factors.cols(); ++k) {
        out.emplace_back(fm.factors.col(k).data(), fm.factors.col(k).data() + fm.factors.rows());
    }
    return out;
}

std::string endogenous_id(const ForecastContext& ctx, const std::string& token) {
    if (token == "inventory") return inventory_id(ctx.metal);
    return token;
}

Prepared prepare(const ForecastContext& ctx, const ModelSpec& spec) {
    spec.validate();
    Prepared prep;
    prep.p = spec.p;
    prep.s = spec.s;
    auto own_growth = window_values(ctx.growth, ctx.origin, ctx.window, ctx.target_id());
    auto family = spec.family;
    if (spec.restricted && (family == ModelFamily::ARDL || family == ModelFamily::ARDI)) family = ModelFamily::AR;
    if (family == ModelFamily::ARDI && spec.r == 0) family = ModelFamily::AR;
    if (spec.restricted && family == ModelFamily::FAVAR) family = ModelFamily::VAR;

    switch (family) {
        case ModelFamily::RWD:
        case ModelFamily::AR:
            prep.series.push_back(std::move(own_growth));
            prep.own.push_back(true);
            break;
        case ModelFamily::ARDL:
            prep.series.push_back(std::move(own_growth));
            prep.own.push_back(true);
            for (const auto& id : resolve_predictors(ctx, spec.predictors)) {
                prep.series.push_back(window_values(ctx.predictors.at(id), ctx.origin, ctx.window, id));
                prep.own.push_back(false);
            }
            break;
        case ModelFamily::ARDI:
            prep.series.push_back(std::move(own_growth));
            prep.own.push_back(true);
            for (auto& f : factor_blocks(ctx, {}, spec.r, spec.factor_options)) {
                prep.series.push_back(std::move(f));
                prep.own.push_back(false);
            }
            break;
        case ModelFamily::VAR:
        case ModelFamily::FAVAR: {
            // Target equation first.
            prep.series.push_back(std::move(own_growth));
            prep.own.push_back(true);
            std::vector<std::string> excluded;
            for (const auto& token : spec.endogenous) {
                if (token == "price") continue;
                const auto id = endogenous_id(ctx, token);
                auto it = ctx.predictors.find(id);
                if (it == ctx.predictors.end()) throw ConfigError(fmt::format("unknown endogenous variable '{}'", id));
                prep.series.push_back(window_values(it->second, ctx.origin, ctx.window, id));
                prep.own.push_back(true);
                excluded.push_back(id);
            }
            if (family == ModelFamily::FAVAR) {
                for (auto& f : factor_blocks(ctx, excluded, spec.r, spec.factor_options)) {
                    prep.series.push_back(std::move(f));
                    prep.own.push_back(true);
                }
            }
            prep.iterated = spec.iterated;
            break;
        }
    }
    return prep;
}

void check_horizon(int h) {
    if (h < 1 || h > kMaxHorizon) throw ConfigError(fmt::format("horizon {} outside 1..{}", h, kMaxHorizon));
}

}  // namespace

double forecast_rwd(const ForecastContext& ctx, int h) {
    check_horizon(h);
    const auto g = window_values(ctx.growth, ctx.origin, ctx.window, ctx.target_id());
    double s = 0.0;
    for (double v : g) s += v;
    return s / static_cast<double>(g.size());
}

double forecast_ar(const ForecastContext& ctx, const ModelSpec& spec, int h) {
    check_horizon(h);
    auto ar = spec;
    ar.family = ModelFamily::AR;
    return predict_direct(prepare(ctx, ar), h);
}

double forecast_ardl(const ForecastContext& ctx, const ModelSpec& spec, int h) {
    check_horizon(h);
    return predict_direct(prepare(ctx, spec), h);
}

double forecast_ardi(const ForecastContext& ctx, const ModelSpec& spec, int h) {
    check_horizon(h);
    return predict_direct(prepare(ctx, spec), h);
}

double forecast_var(const ForecastContext& ctx, const ModelSpec& spec, int h) {
    check_horizon(h);
    auto prep = prepare(ctx, spec);
    if (prep.iterated) return iterate_var(prep, h).back();
    return predict_direct(prep, h);
}

double forecast_favar(const ForecastContext& ctx, const ModelSpec& spec, int h) { return forecast_var(ctx, spec, h); }

std::vector<double> forecast_fan(const ForecastContext& ctx, const ModelSpec& spec, int max_horizon) {
    check_horizon(max_horizon);
    if (spec.family == ModelFamily::RWD) return std::vector<double>(static_cast<std::size_t>(max_horizon), forecast_rwd(ctx, 1));
    const auto prep = prepare(ctx, spec);
    if (prep.iterated) return iterate_var(prep, max_horizon);
    std::vector<double> fan;
    for (int h = 1; h <= max_horizon; ++h) fan.push_back(predict_direct(prep, h));
    return fan;
}

}  // namespace metalcast
