#include "metalcast/backtest.hpp"
#include "metalcast/config.hpp"
#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"
#include "metalcast/fixtures.hpp"
#include "metalcast/report.hpp"
#include "metalcast/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>

#include <fmt/format.h>

namespace fs = std::filesystem;
using namespace metalcast;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Root seed of every random stream");
    cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
}

BacktestConfig load_with_overrides(const std::string& path, const Overrides& o) {
    auto config = load_config(path);
    if (o.seed) config.seed = *o.seed;
    if (o.workers) config.workers = *o.workers;
    if (o.out) config.out_dir = *o.out;
    config.validate();
    return config;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_backtest_cmd(const std::string& config_path, const Overrides& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto config = load_with_overrides(config_path, o);
    const auto report = run_backtest(config);
    emit_report(report, config, config.out_dir);
    fmt::print("backtest: {} forecasts, {} failed cells, {:.1f} s -> {}\n", report.forecasts.size(),
               report.errors.size(), seconds_since(t0), config.out_dir);
    return 0;
}

int run_race_cmd(const std::string& config_path, const Overrides& o) {
    auto config = load_with_overrides(config_path, o);
    const auto panel = load_panel(load_manifest(config.manifest));
    HorseRaceConfig race;
    const auto origins = forecast_origins(config, panel);
    race.first_vintage = origins.front();
    race.last_vintage = origins.back();
    race.window = config.nowcast_window;
    race.variables = config.race_variables;
    race.workers = config.workers;
    race.dm = config.dm;
    auto models = config.race_models;
    if (models.empty() || models.front().family != NowcastFamily::RWD) {
        throw ConfigError("nowcast race models must start with RWD");
    }
    for (auto& m : models) m.mcmc.seed = stage_seeds(config).race;
    const auto report = nowcast_horse_race(panel, models, race);
    fs::create_directories(config.out_dir);
    csv::write_file((fs::path(config.out_dir) / "nowcast_horse_race.csv").string(), report.to_csv());
    csv::write_file((fs::path(config.out_dir) / "nowcast_horse_race.json").string(), report.to_json());
    fmt::print("nowcast-race: {} variables x {} models -> {}\n", report.variables.size(), report.models.size(),
               config.out_dir);
    return 0;
}

int run_report_cmd(const std::string& config_path, const Overrides& o, const std::string& forecasts,
                   const std::string& errors) {
    const auto config = load_with_overrides(config_path, o);
    auto records = forecasts_from_csv(csv::read_file(forecasts));
    std::vector<ErrorEntry> ledger;
    if (!errors.empty()) ledger = errors_from_log(csv::read_file(errors));
    const auto report = evaluate_forecasts(config, std::move(records), std::move(ledger));
    emit_report(report, config, config.out_dir);
    fmt::print("report: {} forecasts -> {}\n", report.forecasts.size(), config.out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real-time forecasting of base metal prices"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(library_version()));

    std::string config_path;
    Overrides overrides;

    auto* backtest = app.add_subcommand("backtest", "Run the rolling-origin backtest and write all reports");
    backtest->add_option("--config", config_path, "Backtest config file")->required()->check(CLI::ExistingFile);
    add_overrides(backtest, overrides);

    auto* race = app.add_subcommand("nowcast-race", "Nowcasting horse race over the forecast origins");
    race->add_option("--config", config_path, "Backtest config file")->required()->check(CLI::ExistingFile);
    add_overrides(race, overrides);

    std::string forecasts_path;
    std::string errors_path;
    auto* report = app.add_subcommand("report", "Re-evaluate a forecasts.csv and rewrite the reports");
    report->add_option("--config", config_path, "Backtest config file")->required()->check(CLI::ExistingFile);
    report->add_option("--forecasts", forecasts_path, "forecasts.csv of an earlier run")->required()->check(CLI::ExistingFile);
    report->add_option("--errors", errors_path, "errors.log of the same run")->check(CLI::ExistingFile);
    add_overrides(report, overrides);

    auto* synthgen = app.add_subcommand("synthgen", "Write the synthetic panel, manifest and backtest config");
    add_overrides(synthgen, overrides);
    int synth_factors = 2;
    synthgen->add_option("--factors", synth_factors, "Common factors of the synthetic DGP")->check(CLI::PositiveNumber);

    auto* fixtures = app.add_subcommand("fixtures", "Write the first-release IP vintage fixture");
    add_overrides(fixtures, overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*backtest) return run_backtest_cmd(config_path, overrides);
        if (*race) return run_race_cmd(config_path, overrides);
        if (*report) return run_report_cmd(config_path, overrides, forecasts_path, errors_path);
        if (*synthgen) {
            SynthSpec spec;
            spec.factors = synth_factors;
            const auto seed = overrides.seed.value_or(spec.seed);
            spec.seed = seed;
            const auto dir = overrides.out.value_or("synthetic");
            write_synth(spec, generate_synth(spec), dir, seed);
            fmt::print("synthgen: wrote {}\n", dir);
            return 0;
        }
        if (*fixtures) {
            const auto dir = overrides.out.value_or("fixtures");
            fs::create_directories(dir);
            const auto path = (fs::path(dir) / "IP_vintages.csv").string();
            csv::write_file(path, ip_vintage_fixture_csv());
            fmt::print("fixtures: wrote {}\n", path);
            return 0;
        }
    } catch (const ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return 1;
    } catch (const DataError& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 1;
}
