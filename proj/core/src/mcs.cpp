#include "metalcast/mcs.hpp"

#include "metalcast/errors.hpp"
#include "metalcast/parallel.hpp"
#include "metalcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace metalcast {

double MCSResult::p_value(std::string_view model) const {
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i] == model) return p_values[i];
    }
    throw ConfigError(fmt::format("model '{}' not in MCS result", model));
}

const std::vector<std::string>& MCSResult::ssm_at(double alpha) const {
    for (const auto& [a, members] : ssm) {
        if (std::abs(a - alpha) < 1e-12) return members;
    }
    throw ConfigError(fmt::format("MCS was not run at alpha {}", alpha));
}

std::vector<std::size_t> bootstrap_block_starts(std::uint64_t seed, std::size_t replication, std::size_t T,
                                                std::size_t block) {
    const std::size_t blocks = (T + block - 1) / block;
    SplitMix64 rng(derive_seed(seed, {replication, T, block}));
    std::uniform_int_distribution<std::size_t> pick(0, T - block);
    std::vector<std::size_t> starts(blocks);
    for (auto& s : starts) s = pick(rng);
    return starts;
}

namespace {

double safe_ratio(double num, double var) {
    if (var > 0.0) return num / std::sqrt(var);
    if (num > 0.0) return std::numeric_limits<double>::infinity();
    if (num < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
}

struct StepOutcome {
    std::size_t eliminated = 0;  // position within the active set
    double p_value = 1.0;
    bool all_tied = false;
};

// boot: bootstrap means, B x m (all models); sample: sample means (m).
StepOutcome tmax_step(const std::vector<std::size_t>& active, const Eigen::MatrixXd& boot,
                      const Eigen::VectorXd& sample) {
    const auto B = boot.rows();
    const std::size_t k = active.size();
    double avg = 0.0;
    for (auto i : active) avg += sample(static_cast<Eigen::Index>(i));
    avg /= static_cast<double>(k);

    Eigen::VectorXd zbar = Eigen::VectorXd::Zero(B);
    for (auto i : active) {
        const auto ei = static_cast<Eigen::Index>(i);
        zbar.array() += boot.col(ei).array() - sample(ei);
    }
    zbar /= static_cast<double>(k);

    // Column j of dstar is the centred bootstrap deviation of model j from the set average.
    Eigen::MatrixXd dstar(B, static_cast<Eigen::Index>(k));
    std::vector<double> inv_sd(k, 0.0);
    std::vector<double> t(k, 0.0);
    bool all_tied = true;
    for (std::size_t j = 0; j < k; ++j) {
        const auto i = static_cast<Eigen::Index>(active[j]);
        auto col = dstar.col(static_cast<Eigen::Index>(j));
        col.array() = (boot.col(i).array() - sample(i)) - zbar.array();
        const double var = col.squaredNorm() / static_cast<double>(B);
        const double d = sample(i) - avg;
        t[j] = safe_ratio(d, var);
        // A zero-variance column is identically zero and contributes a ratio of 0.
        inv_sd[j] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        if (var > 0.0) t[j] = d * inv_sd[j];
        if (var > 0.0 || d != 0.0) all_tied = false;
    }
    StepOutcome out;
    if (all_tied) {
        out.all_tied = true;
        return out;
    }
    // active is sorted by model id, so the first maximum is the id tie-break.
    out.eliminated = static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
    const double stat = t[out.eliminated];
    Eigen::VectorXd mx = Eigen::VectorXd::Constant(B, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < k; ++j) {
        mx = mx.cwiseMax(dstar.col(static_cast<Eigen::Index>(j)) * inv_sd[j]);
    }
    out.p_value = static_cast<double>((mx.array() >= stat).count()) / static_cast<double>(B);
    return out;
}

StepOutcome trange_step(const std::vector<std::size_t>& active, const Eigen::MatrixXd& boot,
                        const Eigen::VectorXd& sample) {
    const auto B = boot.rows();
    const std::size_t k = active.size();
    Eigen::MatrixXd zeta(B, static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
        const auto i = static_cast<Eigen::Index>(active[j]);
        zeta.col(static_cast<Eigen::Index>(j)) = boot.col(i).array() - sample(i);
    }
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    bool all_tied = true;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            const auto ea = static_cast<Eigen::Index>(a);
            const auto eb = static_cast<Eigen::Index>(b);
            var(ea, eb) = (zeta.col(ea) - zeta.col(eb)).squaredNorm() / static_cast<double>(B);
            const double d = sample(static_cast<Eigen::Index>(active[a])) - sample(static_cast<Eigen::Index>(active[b]));
            t(ea, eb) = safe_ratio(d, var(ea, eb));
            if (var(ea, eb) > 0.0 || d != 0.0) all_tied = false;
        }
    }
    StepOutcome out;
    if (all_tied) {
        out.all_tied = true;
        return out;
    }
    double stat = 0.0;
    double best_row = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < k; ++a) {
        double row = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            const double v = t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            row = std::max(row, v);
            stat = std::max(stat, std::abs(v));
        }
        if (row > best_row) {
            best_row = row;
            out.eliminated = a;
        }
    }
    std::size_t exceed = 0;
    for (Eigen::Index r = 0; r < B; ++r) {
        double mx = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = a + 1; b < k; ++b) {
                const auto ea = static_cast<Eigen::Index>(a);
                const auto eb = static_cast<Eigen::Index>(b);
                mx = std::max(mx, std::abs(safe_ratio(zeta(r, ea) - zeta(r, eb), var(ea, eb))));
            }
        }
        if (mx >= stat) ++exceed;
    }
    out.p_value = static_cast<double>(exceed) / static_cast<double>(B);
    return out;
}

// Exact ties leave bitwise identical bootstrap columns; the step statistics
// would otherwise act on rounding residue of the set average.
bool identical_columns(const std::vector<std::size_t>& active, const Eigen::MatrixXd& boot,
                       const Eigen::VectorXd& sample) {
    const auto first = static_cast<Eigen::Index>(active.front());
    for (auto i : active) {
        const auto ei = static_cast<Eigen::Index>(i);
        if (sample(ei) != sample(first) || boot.col(ei) != boot.col(first)) return false;
    }
    return true;
}

}  // namespace

MCSResult mcs_procedure(const LossMatrix& losses, const McsConfig& config) {
    const auto& L = losses.losses();
    const auto T = static_cast<std::size_t>(L.rows());
    const auto m = static_cast<std::size_t>(L.cols());
    if (m == 0) throw ConfigError("MCS needs at least one model");
    if (config.replications < 1) throw ConfigError("MCS needs at least one bootstrap replication");
    if (config.block < 1) throw ConfigError("MCS block length must be positive");
    for (double a : config.alphas) {
        if (!(a > 0.0 && a < 1.0)) throw ConfigError(fmt::format("MCS alpha {} outside (0, 1)", a));
    }
    for (Eigen::Index i = 0; i < L.size(); ++i) {
        if (std::isnan(L.data()[i])) throw DimensionError("MCS requires a complete loss matrix");
    }

    MCSResult result;
    result.models = losses.models();
    result.p_values.assign(m, 1.0);
    result.config = config;

    // Work in id order so the outcome is independent of the caller's ordering.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return result.models[a] < result.models[b]; });
    for (std::size_t i = 1; i < m; ++i) {
        if (result.models[order[i]] == result.models[order[i - 1]]) {
            throw ConfigError(fmt::format("duplicate model id '{}'", result.models[order[i]]));
        }
    }

    if (m > 1) {
        const auto block = static_cast<std::size_t>(config.block);
        if (T < 2 * block) {
            throw InsufficientDataError(fmt::format("MCS needs T >= 2*block ({}), got {}", 2 * block, T));
        }
        // Prefix sums per model (sorted order) for fast block sums.
        Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T + 1), static_cast<Eigen::Index>(m));
        Eigen::VectorXd sample(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) {
            const auto col = static_cast<Eigen::Index>(order[j]);
            for (std::size_t t = 0; t < T; ++t) {
                prefix(static_cast<Eigen::Index>(t + 1), static_cast<Eigen::Index>(j)) =
                    prefix(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) + L(static_cast<Eigen::Index>(t), col);
            }
            sample(static_cast<Eigen::Index>(j)) = prefix(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(j)) / static_cast<double>(T);
        }
        const auto B = static_cast<std::size_t>(config.replications);
        Eigen::MatrixXd boot(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(m));
        parallel_for(B, config.workers, [&](std::size_t r) {
            auto starts = bootstrap_block_starts(config.seed, r, T, block);
            std::size_t remaining = T;
            for (std::size_t j = 0; j < m; ++j) boot(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = 0.0;
            for (auto s : starts) {
                const std::size_t len = std::min(block, remaining);
                remaining -= len;
                for (std::size_t j = 0; j < m; ++j) {
                    const auto ej = static_cast<Eigen::Index>(j);
                    boot(static_cast<Eigen::Index>(r), ej) +=
                        prefix(static_cast<Eigen::Index>(s + len), ej) - prefix(static_cast<Eigen::Index>(s), ej);
                }
            }
            for (std::size_t j = 0; j < m; ++j) boot(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) /= static_cast<double>(T);
        });

        std::vector<std::size_t> active(m);
        std::iota(active.begin(), active.end(), 0);
        double running = 0.0;
        while (active.size() > 1) {
            if (identical_columns(active, boot, sample)) {
                result.stopped_on_ties = true;
                break;
            }
            auto step = config.statistic == McsStatistic::TMax ? tmax_step(active, boot, sample)
                                                               : trange_step(active, boot, sample);
            if (step.all_tied) {
                result.stopped_on_ties = true;
                break;
            }
            running = std::max(running, step.p_value);
            const auto gone = order[active[step.eliminated]];
            result.p_values[gone] = running;
            result.elimination_order.push_back(result.models[gone]);
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(step.eliminated));
        }
        for (auto j : active) {
            result.p_values[order[j]] = 1.0;
            result.elimination_order.push_back(result.models[order[j]]);
        }
    } else {
        result.elimination_order.push_back(result.models.front());
    }

    for (double a : config.alphas) {
        std::vector<std::string> members;
        for (std::size_t i = 0; i < m; ++i) {
            if (result.p_values[i] >= a) members.push_back(result.models[i]);
        }
        result.ssm.emplace_back(a, std::move(members));
    }
    return result;
}

}  // namespace metalcast
