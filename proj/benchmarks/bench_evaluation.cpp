#include "metalcast/evaluation.hpp"
#include "metalcast/mcs.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace metalcast;

namespace {

LossMatrix random_losses(std::size_t T, std::size_t models) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    Eigen::MatrixXd L(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(models));
    for (Eigen::Index j = 0; j < L.cols(); ++j)
        for (Eigen::Index t = 0; t < L.rows(); ++t) {
            const double e = (1.0 + 0.05 * static_cast<double>(j)) * z(rng);
            L(t, j) = e * e;
        }
    std::vector<YearMonth> dates;
    std::vector<std::string> ids;
    for (std::size_t t = 0; t < T; ++t) dates.push_back(YearMonth(2010, 1) + static_cast<int>(t));
    for (std::size_t j = 0; j < models; ++j) ids.push_back("m" + std::to_string(j));
    return {1, dates, ids, L};
}

void BM_Mcs(benchmark::State& state) {
    const auto losses = random_losses(120, static_cast<std::size_t>(state.range(0)));
    McsConfig cfg;
    cfg.replications = 2000;
    cfg.block = 6;
    cfg.seed = 3;
    cfg.workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(mcs_procedure(losses, cfg));
}
BENCHMARK(BM_Mcs)->Args({3, 1})->Args({16, 1})->Args({16, 4})->Unit(benchmark::kMillisecond);

void BM_DieboldMariano(benchmark::State& state) {
    const auto losses = random_losses(static_cast<std::size_t>(state.range(0)), 2);
    const Eigen::VectorXd a = losses.losses().col(0);
    const Eigen::VectorXd b = losses.losses().col(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dm_test({a.data(), static_cast<std::size_t>(a.size())},
                                         {b.data(), static_cast<std::size_t>(b.size())}, 12));
    }
}
BENCHMARK(BM_DieboldMariano)->Arg(60)->Arg(240);

void BM_BlockStarts(benchmark::State& state) {
    std::size_t r = 0;
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap_block_starts(9, r++, 120, 6));
}
BENCHMARK(BM_BlockStarts);

}  // namespace

BENCHMARK_MAIN();
