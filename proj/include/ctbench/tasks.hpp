#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ctbench/features.hpp"
#include "ctbench/forecasting.hpp"
#include "ctbench/market_data.hpp"
#include "ctbench/ou.hpp"
#include "ctbench/strategies.hpp"
#include "ctbench/tsg.hpp"

namespace ctbench {

enum class TaskKind { PredictiveUtility, StatArb };

std::string to_string(TaskKind task);
TaskKind parse_task(const std::string& text);

inline const std::string kMeanReversionStrategy = "mean_reversion";

/// One walk-forward split: offset tau (1-based, last training hour) with
/// its train and test windows.
struct Split {
    std::size_t tau = 0;
    ReturnMatrix train;
    ReturnMatrix test;
};

struct TaskTimings {
    double fit_seconds = 0.0;
    std::vector<double> infer_seconds;  // one per generate/reconstruct call
    double forecast_seconds = 0.0;
};

struct ExcludedAsset {
    std::string asset;
    std::string reason;
};

struct TaskResult {
    TaskKind task = TaskKind::PredictiveUtility;
    std::size_t tau = 0;
    std::string model_id;
    std::vector<double> fees;
    /// strategy -> one curve per entry of `fees`
    std::map<std::string, std::vector<EquityCurve>> curves;
    /// strategy -> error message for strategies that could not be traded
    std::map<std::string, std::string> strategy_failures;

    ReturnMatrix actual;       // real test returns
    ReturnMatrix predictions;  // forecasts (predictive) or test reconstruction (stat-arb)
    ReturnMatrix signal;       // ranking signal aligned with `actual`: forecasts, or -s
    ReturnMatrix scores;       // stat-arb s-scores used for each traded hour (0 when excluded)
    std::map<std::string, OuParams> ou_params;
    std::vector<ExcludedAsset> excluded;
    TaskTimings timings;
};

/// Builds a predictor from a training set; the default fits the built-in forecaster.
using PredictorTrainer = std::function<std::unique_ptr<Predictor>(const TrainingSet&, const ForecasterConfig&)>;

PredictorTrainer default_trainer();

struct PredictiveUtilityConfig {
    ForecasterConfig forecaster;
    std::vector<std::string> strategies = predictive_strategy_names();
    std::vector<double> fees{0.0, 0.0003};
    std::uint64_t seed = 0;
    double initial_capital = 10000.0;
    std::vector<FeatureSpec> features = feature_catalog();
};

struct StatArbConfig {
    double gamma = 2.0;
    std::vector<double> fees{0.0, 0.0003};
    double initial_capital = 10000.0;
};

/// fit on train -> generate w synthetic hours -> featurise -> fit forecaster
/// -> predict every test hour from causal features of [train | test] ->
/// strategy weights -> simulate on the real test returns.
TaskResult run_predictive_utility(const Split& split, TsgModel& model, const PredictiveUtilityConfig& config,
                                  const PredictorTrainer& trainer = default_trainer());

/// fit on train -> reconstruct train -> per-asset OU fit on residuals
/// (failing assets excluded) -> reconstruct test -> s-scores -> gated,
/// normalised weights -> simulate. Weights for test hour k come from the
/// residual of hour k-1 (the last training residual for k = 0).
TaskResult run_stat_arb(const Split& split, TsgModel& model, const StatArbConfig& config);

/// Deterministic per-cell seed derivation (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace ctbench
