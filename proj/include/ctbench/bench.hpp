#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctbench/forecasting.hpp"
#include "ctbench/metrics.hpp"
#include "ctbench/tasks.hpp"
#include "ctbench/tsg.hpp"

namespace ctbench {

inline constexpr const char* kVersion = "1.0.0";

/// A built-in model id ("gaussian", "pca:ev90", ...) or an external model
/// served from a bundle directory or an adapter command.
struct ModelSpec {
    std::string id;
    std::string builtin;  // empty for external models
    std::filesystem::path bundle;
    std::string command;
    ModeCapabilities capabilities{true, true};

    [[nodiscard]] std::unique_ptr<TsgModel> instantiate(const std::filesystem::path& work_dir) const;
};

struct BenchConfig {
    std::filesystem::path data;
    std::optional<std::string> start;
    std::optional<std::string> end;
    std::size_t window = 12000;
    std::size_t test_predictive = 720;
    std::size_t test_stat_arb = 360;
    std::vector<ModelSpec> models;
    std::vector<TaskKind> tasks{TaskKind::PredictiveUtility, TaskKind::StatArb};
    std::vector<std::string> strategies = predictive_strategy_names();
    std::vector<double> fees{0.0, 0.0003};
    double gamma = 2.0;
    std::uint64_t seed = 0;
    ForecasterConfig forecaster;
    std::vector<std::string> features;  // empty selects the whole catalog
    std::filesystem::path output_dir = "ctbench_out";
    std::size_t jobs = 1;

    [[nodiscard]] std::size_t test_length(TaskKind task) const {
        return task == TaskKind::PredictiveUtility ? test_predictive : test_stat_arb;
    }
    /// Throws InvalidValue on an out-of-range field.
    void validate() const;
};

/// Reads a JSON config. Relative paths resolve against the file's directory.
/// Throws ParseError, UnknownKey or InvalidValue.
BenchConfig parse_config(const std::filesystem::path& path);
BenchConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// Fully resolved config with defaults applied, as canonical JSON text.
/// `output_dir` and `jobs` are included only when `with_runtime` is set.
std::string config_json(const BenchConfig& config, bool with_runtime = false);
/// FNV-1a (64 bit, hex) over the resolved config without output_dir and jobs.
std::string config_hash(const BenchConfig& config);

/// Outcome of one (task, split, model) unit of work.
struct CellOutcome {
    TaskKind task = TaskKind::PredictiveUtility;
    std::size_t tau = 0;
    std::string year;
    std::string model;
    std::string status = "ok";  // "ok", "failed" or "skipped"
    std::string error;
    std::optional<TaskResult> result;
};

struct YearlyAggregate {
    std::vector<MetricsReport> reports;  // deterministic metrics, timing fields empty
    /// (task, model, strategy, fee, year) -> chained equity over the year's splits
    std::map<std::tuple<std::string, std::string, std::string, double, std::string>, EquityCurve> equity;
    /// (task, model, year) -> fit/infer timings
    std::map<std::tuple<std::string, std::string, std::string>, TimingMetrics> timings;
};

/// Groups splits by the calendar year their test window starts in, pools
/// error/rank metrics over every cell of the year and computes trading/risk
/// metrics on equity chained multiplicatively across the year's splits.
/// `strategies` lists the strategies each task is expected to report.
/// Throws EmptyYear for a requested year with no splits.
YearlyAggregate aggregate_yearly(const std::vector<CellOutcome>& cells,
                                 const std::map<TaskKind, std::vector<std::string>>& strategies,
                                 const std::vector<double>& fees, const std::vector<std::string>& years = {});

/// Rank tables per (task, year) over reports with status other than "skipped".
/// Groups with fewer than two models are left out.
std::map<std::pair<std::string, std::string>, RankTable> rank_by_group(const std::vector<MetricsReport>& reports,
                                                                       const std::vector<std::string>& metrics);

struct RunSummary {
    std::size_t cells = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::vector<std::string> failures;  // "<task> tau=<tau> <model>[/<strategy>]: <error>"

    [[nodiscard]] bool all_succeeded() const noexcept { return failed == 0; }
};

/// Executes every (split x model x task) cell on `config.jobs` workers and
/// writes the output tree under `config.output_dir`.
RunSummary run(const BenchConfig& config);

/// Re-reads metrics/*.json under `dir` and rewrites ranks/*.csv.
std::size_t rerank(const std::filesystem::path& dir);

/// Human-readable descriptive statistics (JSON) for a candle directory.
std::string stats_report(const std::filesystem::path& data);

}  // namespace ctbench
