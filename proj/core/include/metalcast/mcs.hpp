#pragma once

#include "metalcast/evaluation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metalcast {

enum class McsStatistic {
    TMax,   // max over models of the loss relative to the set average
    TRange  // max over pairs of the studentized loss difference
};

struct McsConfig {
    int replications = 10000;
    int block = 6;
    std::vector<double> alphas{0.10, 0.25};
    std::uint64_t seed = 0;
    McsStatistic statistic = McsStatistic::TMax;
    int workers = 1;
};

struct MCSResult {
    /// Input order.
    std::vector<std::string> models;
    /// MCS p-value per model, aligned with `models`.
    std::vector<double> p_values;
    /// First eliminated first. Models still tied when elimination stops are
    /// appended in id order and carry p = 1.
    std::vector<std::string> elimination_order;
    /// Set of superior models per alpha (members in input order).
    std::vector<std::pair<double, std::vector<std::string>>> ssm;
    McsConfig config;
    /// All models had identical losses at some step; elimination stopped there.
    bool stopped_on_ties = false;

    [[nodiscard]] double p_value(std::string_view model) const;
    /// Throws ConfigError for an alpha that was not requested.
    [[nodiscard]] const std::vector<std::string>& ssm_at(double alpha) const;
};

/// Moving-block bootstrap start indices for replication `r`: ceil(T/block)
/// overlapping blocks, starts uniform on [0, T - block]. Depends only on
/// (seed, r, T, block).
std::vector<std::size_t> bootstrap_block_starts(std::uint64_t seed, std::size_t replication, std::size_t T,
                                                std::size_t block);

/// Iterative MCS elimination with moving-block bootstrap variances and
/// p-values. The same resampled indices are shared by every model within a
/// replication. Results do not depend on model order or worker count.
/// `losses` must be complete (no NaN).
MCSResult mcs_procedure(const LossMatrix& losses, const McsConfig& config);

}  // namespace metalcast
