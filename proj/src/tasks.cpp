#include "ctbench/tasks.hpp"

#include <chrono>
#include <cmath>

#include "ctbench/error.hpp"

namespace ctbench {
namespace {

template <typename F>
double timed(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return std::max(elapsed.count(), 1e-9);
}

ReturnMatrix like(const ReturnMatrix& shape) {
    return {shape.assets, shape.timestamps, Matrix(shape.n(), shape.l())};
}

void trade(TaskResult& result, const std::string& strategy, const WeightMatrix& weights, const ReturnMatrix& test,
           const std::vector<double>& fees, double initial) {
    std::vector<EquityCurve> curves;
    for (double fee : fees) curves.push_back(simulate(weights, test, fee, initial));
    result.curves[strategy] = std::move(curves);
}

}  // namespace

std::string to_string(TaskKind task) {
    return task == TaskKind::PredictiveUtility ? "predictive_utility" : "stat_arb";
}

TaskKind parse_task(const std::string& text) {
    if (text == "predictive_utility") return TaskKind::PredictiveUtility;
    if (text == "stat_arb") return TaskKind::StatArb;
    throw Error(ErrorCode::InvalidValue, "unknown task '" + text + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PredictorTrainer default_trainer() {
    return [](const TrainingSet& data, const ForecasterConfig& config) -> std::unique_ptr<Predictor> {
        return std::make_unique<TrainedForecaster>(fit_forecaster(data, config));
    };
}

TaskResult run_predictive_utility(const Split& split, TsgModel& model, const PredictiveUtilityConfig& config,
                                  const PredictorTrainer& trainer) {
    if (!model.capabilities().supports_generate) {
        throw Error(ErrorCode::ModeUnsupported, model.id() + " cannot generate");
    }
    const std::size_t n = split.train.n();
    const std::size_t w = split.train.l();
    const std::size_t s = split.test.l();

    TaskResult result;
    result.task = TaskKind::PredictiveUtility;
    result.tau = split.tau;
    result.model_id = model.id();
    result.fees = config.fees;
    result.actual = split.test;

    model.fit(split.train, static_cast<std::int64_t>(split.tau));
    result.timings.fit_seconds = model.fit_seconds();

    ReturnMatrix generated;
    result.timings.infer_seconds.push_back(timed([&] { generated = model.generate(n, w, config.seed); }));

    std::unique_ptr<Predictor> predictor;
    result.timings.forecast_seconds = timed([&] {
        const auto synthetic_features = compute_features(generated, config.features);
        predictor = trainer(build_training_set(synthetic_features, generated), config.forecaster);
    });

    // Features over [train | test] are causal, so column w-1+k only sees
    // hours up to the one before test hour k.
    const auto history = concat_columns(split.train, split.test);
    const auto features = compute_features(history, config.features);
    result.predictions = like(split.test);
    for (std::size_t k = 0; k < s; ++k) {
        const auto column = predictor->predict(features, w - 1 + k);
        if (column.size() != n) throw Error(ErrorCode::ShapeMismatch, "predictor returned the wrong number of assets");
        for (std::size_t i = 0; i < n; ++i) result.predictions.values(i, k) = column[i];
    }
    result.signal = result.predictions;

    for (const auto& name : config.strategies) {
        try {
            const auto weights = weights_from_predictions(result.predictions, strategy_by_name(name));
            trade(result, name, weights, split.test, config.fees, config.initial_capital);
        } catch (const Error& e) {
            result.strategy_failures[name] = e.what();
        }
    }
    return result;
}

TaskResult run_stat_arb(const Split& split, TsgModel& model, const StatArbConfig& config) {
    if (!model.capabilities().supports_reconstruct) {
        throw Error(ErrorCode::ModeUnsupported, model.id() + " cannot reconstruct");
    }
    const std::size_t n = split.train.n();
    const std::size_t w = split.train.l();
    const std::size_t s = split.test.l();

    TaskResult result;
    result.task = TaskKind::StatArb;
    result.tau = split.tau;
    result.model_id = model.id();
    result.fees = config.fees;
    result.actual = split.test;

    model.fit(split.train, static_cast<std::int64_t>(split.tau));
    result.timings.fit_seconds = model.fit_seconds();

    ReturnMatrix rebuilt_train;
    result.timings.infer_seconds.push_back(timed([&] { rebuilt_train = model.reconstruct(split.train); }));
    Matrix train_residual(n, w);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < w; ++t) train_residual(i, t) = split.train.values(i, t) - rebuilt_train.values(i, t);
    }

    std::vector<OuParams> params(n);
    std::vector<char> eligible(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            params[i] = fit_ou(train_residual.row(i));
            eligible[i] = 1;
            result.ou_params[split.train.assets[i]] = params[i];
        } catch (const Error& e) {
            result.excluded.push_back({split.train.assets[i], e.what()});
        }
    }
    if (result.excluded.size() == n) {
        throw Error(ErrorCode::AllAssetsExcluded, "no asset's training residuals admit a mean-reverting fit");
    }

    ReturnMatrix rebuilt_test;
    result.timings.infer_seconds.push_back(timed([&] { rebuilt_test = model.reconstruct(split.test); }));
    result.predictions = rebuilt_test;

    result.scores = like(split.test);
    WeightMatrix weights{split.test.assets, split.test.timestamps, Matrix(n, s)};
    std::vector<double> column(n);
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double residual =
                k == 0 ? train_residual(i, w - 1) : split.test.values(i, k - 1) - rebuilt_test.values(i, k - 1);
            column[i] = eligible[i] ? s_score(residual, params[i]) : 0.0;
            result.scores.values(i, k) = column[i];
        }
        const auto eta = stat_arb_weights(column, config.gamma, eligible);
        for (std::size_t i = 0; i < n; ++i) weights.values(i, k) = eta[i];
    }
    result.signal = like(split.test);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < s; ++k) result.signal.values(i, k) = -result.scores.values(i, k);
    }

    try {
        trade(result, kMeanReversionStrategy, weights, split.test, config.fees, config.initial_capital);
    } catch (const Error& e) {
        result.strategy_failures[kMeanReversionStrategy] = e.what();
    }
    return result;
}

}  // namespace ctbench
