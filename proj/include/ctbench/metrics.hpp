#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctbench/market_data.hpp"
#include "ctbench/strategies.hpp"

namespace ctbench {

inline constexpr double kHoursPerYear = 8760.0;

struct ErrorMetrics {
    double mse = 0.0;
    double mae = 0.0;
};

/// Averages over every (split, hour, asset) cell; the slices are paired by position.
ErrorMetrics error_metrics(const ReturnMatrix& actual, const ReturnMatrix& predicted);
ErrorMetrics error_metrics(std::span<const ReturnMatrix> actual, std::span<const ReturnMatrix> predicted);

struct RankMetrics {
    double ic = 0.0;  // NaN when no hour is usable
    double ir = 0.0;  // +-inf when every usable hour has the same IC
    std::vector<double> per_hour;  // NaN for skipped hours
    std::size_t degenerate_hours = 0;
};

/// Per-hour (column) Spearman IC between predictions and realised returns.
/// Hours with a constant vector or fewer than 3 assets are skipped and counted.
RankMetrics rank_metrics(const Matrix& actual, const Matrix& predicted);
RankMetrics rank_metrics(std::span<const ReturnMatrix> actual, std::span<const ReturnMatrix> predicted);

struct TradingMetrics {
    double cagr = 0.0;
    double sharpe = 0.0;  // NaN when the equity returns have zero spread
};

/// `path` is V_0 .. V_s.
TradingMetrics trading_metrics(std::span<const double> path);
TradingMetrics trading_metrics(const EquityCurve& curve);

struct RiskMetrics {
    double mdd = 0.0;
    double var95 = 0.0;  // NaN below 20 returns
    double es95 = 0.0;   // NaN below 20 returns
};

inline constexpr std::size_t kMinRiskSamples = 20;

double max_drawdown(std::span<const double> path);
/// VaR is minus the lower order statistic at index floor(0.05 (N - 1)) of the
/// sorted returns; ES is minus the mean of the returns at or below it.
RiskMetrics risk_metrics(std::span<const double> path);
RiskMetrics risk_metrics(const EquityCurve& curve);

/// Simple returns V_t / V_{t-1} - 1 of an equity path.
std::vector<double> path_returns(std::span<const double> path);

struct PhaseRecords {
    std::optional<double> fit_seconds;
    std::vector<double> infer_seconds;
};

struct TimingMetrics {
    double train_time_s = 0.0;
    double infer_time_s = 0.0;
};

/// Throws MissingPhase when either phase has no record.
TimingMetrics timing_metrics(const PhaseRecords& records);

enum class Orientation { HigherBetter, LowerBetter };

const std::vector<std::string>& metric_names();         // the nine deterministic metrics
const std::vector<std::string>& timing_metric_names();  // train_time_s, infer_time_s
Orientation metric_orientation(const std::string& metric);

struct MetricsReport {
    std::string model;
    std::string task;
    std::string strategy;
    double fee = 0.0;
    std::string year;
    std::size_t split_count = 0;
    std::string status = "ok";  // "ok", "failed" or "skipped"
    std::string error;

    double mse = 0.0;
    double mae = 0.0;
    double ic = 0.0;
    double ir = 0.0;
    double cagr = 0.0;
    double sharpe = 0.0;
    double mdd = 0.0;
    double var95 = 0.0;
    double es95 = 0.0;
    std::size_t degenerate_hours = 0;

    std::optional<double> train_time_s;
    std::optional<double> infer_time_s;

    [[nodiscard]] double value(const std::string& metric) const;
    void set(const std::string& metric, double v);
    [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
};

/// JSON text; NaN becomes null and infinities become "inf"/"-inf". Timing
/// fields are written only when `with_timings` is set.
std::string report_json(const MetricsReport& report, bool with_timings = false);
MetricsReport report_from_json(const std::string& text);
std::string reports_csv(const std::vector<MetricsReport>& reports);

struct RankEntry {
    double mean_value = 0.0;
    double rank = 0.0;
};

struct RankTable {
    std::vector<std::string> models;
    std::vector<std::string> metrics;
    std::map<std::string, Orientation> orientation;
    /// metric -> model -> entry; models whose value is undefined are absent.
    std::map<std::string, std::map<std::string, RankEntry>> ranks;
    /// metric -> number of undefined report values left out of the averages.
    std::map<std::string, std::size_t> excluded;

    [[nodiscard]] std::optional<double> rank(const std::string& metric, const std::string& model) const;
};

/// Averages each model's finite values over its reports (strategies and
/// fees), then assigns average ranks (1 = best) per metric. All reports must
/// share task and year, and every model must cover the same (strategy, fee)
/// cells; otherwise InconsistentGrouping.
RankTable rank_models(const std::vector<MetricsReport>& reports,
                      const std::vector<std::string>& metrics = metric_names());

/// Long format: metric,orientation,model,mean_value,rank,excluded_reports.
std::string rank_table_csv(const RankTable& table);

/// Shortest round-trip decimal for a double ("nan", "inf", "-inf" for non-finite).
std::string format_number(double v);

}  // namespace ctbench
