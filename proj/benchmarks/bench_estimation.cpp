#include "metalcast/factors.hpp"
#include "metalcast/forecast_models.hpp"
#include "metalcast/nowcast.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace metalcast;

namespace {

std::vector<double> ar_series(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> y(n);
    double prev = 0.0;
    for (auto& v : y) {
        v = 0.1 + 0.6 * prev + z(rng);
        prev = v;
    }
    return y;
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
    return m;
}

void BM_DirectProjection(benchmark::State& state) {
    const auto k = static_cast<Eigen::Index>(state.range(0));
    const Eigen::MatrixXd X = gaussian(184, k, 1);
    const auto y = ar_series(184, 2);
    for (auto _ : state) benchmark::DoNotOptimize(direct_projection_fit(y, X, 12));
}
BENCHMARK(BM_DirectProjection)->Arg(2)->Arg(10)->Arg(30);

void BM_ArOls(benchmark::State& state) {
    const auto y = ar_series(240, 3);
    for (auto _ : state) benchmark::DoNotOptimize(ar_ols_fit(y, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ArOls)->Arg(1)->Arg(6);

void BM_AicLagSelection(benchmark::State& state) {
    const auto y = ar_series(240, 4);
    for (auto _ : state) benchmark::DoNotOptimize(select_lag_aic(y, 6));
}
BENCHMARK(BM_AicLagSelection);

void BM_ExtractFactors(benchmark::State& state) {
    const auto N = static_cast<Eigen::Index>(state.range(0));
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < N; ++i) ids.push_back("V" + std::to_string(i));
    const auto panel = standardize_panel(gaussian(184, N, 5), ids);
    for (auto _ : state) benchmark::DoNotOptimize(extract_factors(panel, 2));
}
BENCHMARK(BM_ExtractFactors)->Arg(15)->Arg(60);

void BM_BayesSampler(benchmark::State& state) {
    const auto y = ar_series(120, 6);
    NowcastModelSpec spec;
    spec.family = static_cast<NowcastFamily>(state.range(0));
    spec.mcmc.draws = 500;
    spec.mcmc.burn_in = 250;
    spec.mcmc.seed = 7;
    for (auto _ : state) benchmark::DoNotOptimize(nowcast_path(y, spec, 3, 7));
    state.SetLabel(std::string(display_name(spec.family)));
}
BENCHMARK(BM_BayesSampler)
    ->Arg(static_cast<int>(NowcastFamily::BAR))
    ->Arg(static_cast<int>(NowcastFamily::BARSV))
    ->Arg(static_cast<int>(NowcastFamily::BARSVO))
    ->Unit(benchmark::kMillisecond);

}  // namespace
