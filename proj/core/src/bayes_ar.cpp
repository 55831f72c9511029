// Gibbs samplers for the Bayesian AR(1) nowcasting family. All samplers work on
// the standardized history so the N(0, v I) coefficient prior has the same
// meaning for every series; results are mapped back to the data scale.
#include "metalcast/nowcast.hpp"

#include "metalcast/errors.hpp"
#include "metalcast/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace metalcast {

namespace {

// Seven-component normal mixture approximating log chi^2(1) - kLogChi2Mean.
constexpr std::array<double, 7> kMixProb{0.00730, 0.10556, 0.00002, 0.04395, 0.34001, 0.24566, 0.25750};
constexpr std::array<double, 7> kMixMean{-10.12999, -3.97281, -8.56686, 2.77786, 0.61942, 1.79518, -1.08819};
constexpr std::array<double, 7> kMixVar{5.79596, 2.61369, 5.17950, 0.16735, 0.64009, 0.34023, 1.26261};

constexpr double kLogChi2Mean = -1.2704;

constexpr int kOutlierScales = 10;
constexpr double kOutlierPrior = 0.99;
constexpr double kLogSquareOffset = 1e-5;
constexpr double kSigmaShape = 3.0;
constexpr double kVolShape = 3.0;
constexpr double kVolScale = 0.05;
constexpr double kInitialVolVar = 10.0;

enum class Variant { Constant, Sv, SvOutliers };

struct Standardized {
    std::vector<double> z;
    double center = 0.0;
    double scale = 1.0;
    double diff_var = 1e-8;  // variance of first differences of z, floored
};

Standardized standardize(std::span<const double> history) {
    Standardized s;
    const auto n = static_cast<double>(history.size());
    for (double v : history) s.center += v;
    s.center /= n;
    double ss = 0.0;
    for (double v : history) ss += (v - s.center) * (v - s.center);
    const double sd = std::sqrt(ss / n);
    s.scale = sd > 0.0 ? sd : 1.0;
    for (double v : history) s.z.push_back((v - s.center) / s.scale);

    const std::size_t m = s.z.size() - 1;
    double dm = 0.0;
    for (std::size_t t = 1; t <= m; ++t) dm += s.z[t] - s.z[t - 1];
    dm /= static_cast<double>(m);
    double dv = 0.0;
    for (std::size_t t = 1; t <= m; ++t) {
        const double d = s.z[t] - s.z[t - 1] - dm;
        dv += d * d;
    }
    s.diff_var = std::max(dv / static_cast<double>(m), 1e-8);
    return s;
}

double draw_inv_gamma(Rng& rng, double shape, double scale) {
    std::gamma_distribution<double> g(shape, 1.0 / scale);
    const double x = g(rng);
    if (!(x > 0.0) || !std::isfinite(x)) throw SamplerError("inverse-gamma draw underflowed");
    return 1.0 / x;
}

// beta ~ N(P^{-1} b, P^{-1}) for a 2x2 precision P.
Eigen::Vector2d draw_coef(Rng& rng, std::normal_distribution<double>& nd, const Eigen::Matrix2d& precision,
                          const Eigen::Vector2d& b) {
    Eigen::LLT<Eigen::Matrix2d> llt(precision);
    if (llt.info() != Eigen::Success) throw SamplerError("coefficient precision is not positive definite");
    const Eigen::Vector2d mean = llt.solve(b);
    Eigen::Vector2d e(nd(rng), nd(rng));
    // If P = L L', then L'^{-1} e has covariance P^{-1}.
    return mean + llt.matrixU().solve(e);
}

int draw_discrete(Rng& rng, const double* logw, int k) {
    double mx = logw[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, logw[j]);
    std::array<double, 16> w{};
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
        w[static_cast<std::size_t>(j)] = std::exp(logw[j] - mx);
        total += w[static_cast<std::size_t>(j)];
    }
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    for (int j = 0; j < k - 1; ++j) {
        u -= w[static_cast<std::size_t>(j)];
        if (u < 0.0) return j;
    }
    return k - 1;
}

// Draws the random-walk log-volatility path given mixture indicators, using the
// banded Cholesky factor of the tridiagonal posterior precision.
void draw_log_vol(Rng& rng, std::normal_distribution<double>& nd, const std::vector<double>& ystar,
                  const std::vector<int>& comp, double vol_var, double h0_mean, std::vector<double>& h,
                  std::vector<double>& diag, std::vector<double>& sub, std::vector<double>& u) {
    const std::size_t n = ystar.size();
    const double q = 1.0 / vol_var;
    for (std::size_t t = 0; t < n; ++t) {
        double d = (t + 1 < n) ? 2.0 * q : q;
        if (t == 0) d = 1.0 / kInitialVolVar + (n > 1 ? q : 0.0);
        const auto c = static_cast<std::size_t>(comp[t]);
        d += 1.0 / kMixVar[c];
        double b = (ystar[t] - kMixMean[c] - kLogChi2Mean) / kMixVar[c];
        if (t == 0) b += h0_mean / kInitialVolVar;
        if (t == 0) {
            diag[0] = std::sqrt(d);
            u[0] = b / diag[0];
        } else {
            sub[t] = -q / diag[t - 1];
            const double l2 = d - sub[t] * sub[t];
            if (!(l2 > 0.0)) throw SamplerError("log-volatility precision lost positive definiteness");
            diag[t] = std::sqrt(l2);
            u[t] = (b - sub[t] * u[t - 1]) / diag[t];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double r = u[k] + nd(rng);
        if (k + 1 < n) r -= sub[k + 1] * h[k + 1];
        h[k] = r / diag[k];
    }
}

BayesNowcast run_sampler(std::span<const double> history, const NowcastModelSpec& spec, int horizons,
                         Variant variant) {
    spec.validate();
    if (history.size() < 12) {
        throw InsufficientDataError(fmt::format("Bayesian AR needs at least 12 observations, got {}", history.size()));
    }
    if (horizons < 1) throw ConfigError("horizons must be >= 1");
    const auto st = standardize(history);
    const auto& z = st.z;
    const auto H = static_cast<std::size_t>(horizons);
    if (std::all_of(history.begin(), history.end(), [&](double v) { return v == history.front(); })) {
        BayesNowcast flat;
        flat.mean.assign(H, history.front());
        flat.sd.assign(H, 0.0);
        flat.coef_mean = Eigen::Vector2d(history.front(), 0.0);
        return flat;
    }
    const std::size_t n = z.size() - 1;

    Rng rng(spec.mcmc.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const Eigen::Matrix2d prior_prec = Eigen::Matrix2d::Identity() / spec.mcmc.prior_coef_var;

    Eigen::Matrix2d xtx = Eigen::Matrix2d::Zero();
    Eigen::Vector2d xty = Eigen::Vector2d::Zero();
    double yty = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
        const Eigen::Vector2d x(1.0, z[t - 1]);
        xtx += x * x.transpose();
        xty += x * z[t];
        yty += z[t] * z[t];
    }

    const double sigma_scale = 2.0 * st.diff_var;
    double sigma2 = st.diff_var;
    Eigen::Vector2d beta = Eigen::Vector2d::Zero();

    const bool sv = variant != Variant::Constant;
    const bool outliers = variant == Variant::SvOutliers;
    const double h0_mean = std::log(st.diff_var);
    std::vector<double> h(n, h0_mean), ystar(n), resid(n), diag(n), sub(n), u(n);
    std::vector<int> comp(n, 0), scale(n, 1);
    double vol_var = kVolScale / (kVolShape - 1.0);

    std::array<double, 7> mix_base{};
    for (std::size_t j = 0; j < 7; ++j) mix_base[j] = std::log(kMixProb[j]) - 0.5 * std::log(kMixVar[j]);
    std::array<double, kOutlierScales> scale_base{};
    for (int k = 1; k <= kOutlierScales; ++k) {
        const double prior = k == 1 ? kOutlierPrior : (1.0 - kOutlierPrior) / (kOutlierScales - 1);
        scale_base[static_cast<std::size_t>(k - 1)] = std::log(prior) - std::log(static_cast<double>(k));
    }

    const int kept = spec.mcmc.draws;
    std::vector<double> f_sum(H, 0.0), f_sq(H, 0.0);
    Eigen::Vector2d c_sum = Eigen::Vector2d::Zero(), c_sq = Eigen::Vector2d::Zero();
    std::vector<double> h_sum(sv ? n : 0, 0.0), o_sum(outliers ? n : 0, 0.0);

    for (int it = 0; it < spec.mcmc.burn_in + spec.mcmc.draws; ++it) {
        if (!sv) {
            beta = draw_coef(rng, nd, xtx / sigma2 + prior_prec, xty / sigma2);
            const double ssr = std::max(yty - 2.0 * beta.dot(xty) + beta.dot(xtx * beta), 0.0);
            sigma2 = draw_inv_gamma(rng, kSigmaShape + 0.5 * static_cast<double>(n), sigma_scale + 0.5 * ssr);
        } else {
            Eigen::Matrix2d wxx = Eigen::Matrix2d::Zero();
            Eigen::Vector2d wxy = Eigen::Vector2d::Zero();
            for (std::size_t t = 0; t < n; ++t) {
                const double o = static_cast<double>(scale[t]);
                const double w = std::exp(-h[t]) / (o * o);
                const double x1 = z[t];
                wxx(0, 0) += w;
                wxx(0, 1) += w * x1;
                wxx(1, 1) += w * x1 * x1;
                wxy(0) += w * z[t + 1];
                wxy(1) += w * x1 * z[t + 1];
            }
            wxx(1, 0) = wxx(0, 1);
            beta = draw_coef(rng, nd, wxx + prior_prec, wxy);
            for (std::size_t t = 0; t < n; ++t) resid[t] = z[t + 1] - beta(0) - beta(1) * z[t];

            if (outliers) {
                std::array<double, kOutlierScales> lw{};
                for (std::size_t t = 0; t < n; ++t) {
                    const double e2 = resid[t] * resid[t] * std::exp(-h[t]);
                    for (int k = 1; k <= kOutlierScales; ++k) {
                        const auto kk = static_cast<std::size_t>(k - 1);
                        lw[kk] = scale_base[kk] - 0.5 * e2 / static_cast<double>(k * k);
                    }
                    scale[t] = 1 + draw_discrete(rng, lw.data(), kOutlierScales);
                }
            }

            std::array<double, 7> lw{};
            for (std::size_t t = 0; t < n; ++t) {
                const double e = resid[t] / static_cast<double>(scale[t]);
                ystar[t] = std::log(e * e + kLogSquareOffset);
                for (std::size_t j = 0; j < 7; ++j) {
                    const double dev = ystar[t] - h[t] - kMixMean[j] - kLogChi2Mean;
                    lw[j] = mix_base[j] - 0.5 * dev * dev / kMixVar[j];
                }
                comp[t] = draw_discrete(rng, lw.data(), 7);
            }
            draw_log_vol(rng, nd, ystar, comp, vol_var, h0_mean, h, diag, sub, u);
            double ss = 0.0;
            for (std::size_t t = 1; t < n; ++t) ss += (h[t] - h[t - 1]) * (h[t] - h[t - 1]);
            vol_var = draw_inv_gamma(rng, kVolShape + 0.5 * static_cast<double>(n - 1), kVolScale + 0.5 * ss);
        }
        if (!beta.allFinite()) throw SamplerError("non-finite coefficient draw");
        if (it < spec.mcmc.burn_in) continue;

        double zf = z.back();
        for (std::size_t k = 0; k < H; ++k) {
            zf = beta(0) + beta(1) * zf;
            const double y = st.center + st.scale * zf;
            f_sum[k] += y;
            f_sq[k] += y * y;
        }
        const Eigen::Vector2d c(st.center * (1.0 - beta(1)) + st.scale * beta(0), beta(1));
        c_sum += c;
        c_sq += c.cwiseProduct(c);
        for (std::size_t t = 0; t < h_sum.size(); ++t) h_sum[t] += h[t];
        for (std::size_t t = 0; t < o_sum.size(); ++t) o_sum[t] += scale[t] > 1 ? 1.0 : 0.0;
    }

    const double kd = kept;
    auto sd_of = [&](double s, double sq) { return std::sqrt(std::max(sq / kd - (s / kd) * (s / kd), 0.0)); };
    BayesNowcast out;
    for (std::size_t k = 0; k < H; ++k) {
        out.mean.push_back(f_sum[k] / kd);
        out.sd.push_back(sd_of(f_sum[k], f_sq[k]));
    }
    out.coef_mean = c_sum / kd;
    out.coef_sd = Eigen::Vector2d(sd_of(c_sum(0), c_sq(0)), sd_of(c_sum(1), c_sq(1)));
    const double log_s2 = 2.0 * std::log(st.scale);
    for (double v : h_sum) out.log_vol_mean.push_back(v / kd + log_s2);
    for (double v : o_sum) out.outlier_prob.push_back(v / kd);
    return out;
}

}  // namespace

BayesNowcast bar_posterior(std::span<const double> history, const NowcastModelSpec& spec, int horizons) {
    return run_sampler(history, spec, horizons, Variant::Constant);
}

BayesNowcast bar_sv_posterior(std::span<const double> history, const NowcastModelSpec& spec, int horizons) {
    return run_sampler(history, spec, horizons, Variant::Sv);
}

BayesNowcast bar_svo_posterior(std::span<const double> history, const NowcastModelSpec& spec, int horizons) {
    return run_sampler(history, spec, horizons, Variant::SvOutliers);
}

}  // namespace metalcast
