#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctbench/market_data.hpp"

namespace ctbench {

/// Per-hour portfolio fractions; row i is asset i, column t is test hour t.
struct WeightMatrix {
    std::vector<std::string> assets;
    std::vector<Timestamp> timestamps;
    Matrix values;

    /// Throws InvalidValue if any hour's gross exposure exceeds 1 + 1e-12
    /// or a weight is not finite.
    void validate() const;
};

struct EquityCurve {
    double initial = 10000.0;
    double fee = 0.0;
    std::vector<Timestamp> timestamps;  // one per simulated hour
    std::vector<double> equity;         // V_1 .. V_s
    std::vector<double> pnl;            // V_t - V_{t-1}
    std::vector<double> turnover;       // sum_i |w_t - w_{t-1}|

    [[nodiscard]] std::size_t hours() const noexcept { return equity.size(); }
    [[nodiscard]] double final_equity() const noexcept { return equity.empty() ? initial : equity.back(); }
    /// V_0 followed by every V_t.
    [[nodiscard]] std::vector<double> path() const;
    /// Simple equity returns dV_t / V_{t-1}.
    [[nodiscard]] std::vector<double> returns() const;

    friend bool operator==(const EquityCurve&, const EquityCurve&) = default;
};

// Rank-based books break prediction ties by ascending asset index, which is
// ascending identifier order for loaded data.

/// Top ceil(n/10) long at +0.5 total, bottom ceil(n/10) short at -0.5 total.
std::vector<double> weights_csm(std::span<const double> predictions);
/// Top ceil(n/5) equally weighted long, everything else flat.
std::vector<double> weights_lotq(std::span<const double> predictions);
/// r_i / sum_j |r_j|.
std::vector<double> weights_pw(std::span<const double> predictions);
/// Top floor(n/2) long at +0.5 total, bottom floor(n/2) short at -0.5 total.
std::vector<double> weights_half_ls(std::span<const double> predictions);

using StrategyFn = std::function<std::vector<double>(std::span<const double>)>;

/// "csm", "lotq", "pw", "half_ls".
StrategyFn strategy_by_name(const std::string& name);
const std::vector<std::string>& predictive_strategy_names();

/// Weights for every hour from a predictions matrix (n x s).
WeightMatrix weights_from_predictions(const ReturnMatrix& predictions, const StrategyFn& strategy);

/// Hourly-rebalanced simulation on simple returns exp(r) - 1, charging
/// fee x turnover each hour (entry from a flat book counts as turnover).
EquityCurve simulate(const WeightMatrix& weights, const ReturnMatrix& test_returns, double fee,
                     double initial = 10000.0);

/// Writes `timestamp,equity,pnl,turnover` with a leading V_0 row.
std::string equity_csv(const EquityCurve& curve);
/// Minimal line chart of equity on a log-scaled axis, one polyline per curve.
std::string equity_svg(const std::vector<std::pair<std::string, const EquityCurve*>>& curves, const std::string& title);

}  // namespace ctbench
