#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ctbench/features.hpp"
#include "ctbench/matrix.hpp"

namespace ctbench {

enum class ForecastAlgorithm { Gbdt, Ridge };

std::string to_string(ForecastAlgorithm algorithm);
ForecastAlgorithm parse_forecast_algorithm(const std::string& text);

struct ForecasterConfig {
    ForecastAlgorithm algorithm = ForecastAlgorithm::Gbdt;
    int trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    double subsample = 1.0;
    int min_samples_leaf = 1;
    double ridge_lambda = 1.0;
    std::uint64_t seed = 0;

    /// Throws InvalidValue when a field is out of range.
    void validate() const;
};

/// Rows are (asset, hour) pairs in asset-major order.
struct TrainingSet {
    Matrix x;  // rows x d
    std::vector<double> y;
    std::vector<std::string> feature_names;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
};

/// Pairs feature cell (i, t, .) with returns[i][t+1]; the last hour has no
/// target and is dropped.
TrainingSet build_training_set(const FeatureTensor& features, const ReturnMatrix& returns);

/// Anything mapping a feature tensor column to next-hour return predictions.
class Predictor {
public:
    virtual ~Predictor() = default;
    /// Length-n predictions of the returns at hour t+1 from features at hour t.
    [[nodiscard]] virtual std::vector<double> predict(const FeatureTensor& features, std::size_t t) const = 0;
};

class TrainedForecaster final : public Predictor {
public:
    struct TreeNode {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<TreeNode>;

    [[nodiscard]] const ForecasterConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return names_; }
    [[nodiscard]] std::size_t tree_count() const noexcept { return trees_.size(); }
    [[nodiscard]] double intercept() const noexcept { return base_; }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coef_; }

    [[nodiscard]] double predict_row(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> predict(const FeatureTensor& features, std::size_t t) const override;

    /// Versioned binary blob; not promised to be stable across versions.
    [[nodiscard]] std::vector<std::uint8_t> serialize() const;
    static TrainedForecaster deserialize(std::span<const std::uint8_t> blob);

    friend bool operator==(const TrainedForecaster& a, const TrainedForecaster& b) {
        return a.serialize() == b.serialize();
    }

private:
    friend TrainedForecaster fit_forecaster(const TrainingSet&, const ForecasterConfig&);

    ForecasterConfig config_;
    std::vector<std::string> names_;
    double base_ = 0.0;
    std::vector<Tree> trees_;
    std::vector<double> coef_;
};

/// Squared-error gradient-boosted trees with exact greedy splits, or
/// closed-form ridge with an unpenalised intercept.
TrainedForecaster fit_forecaster(const TrainingSet& data, const ForecasterConfig& config);

}  // namespace ctbench
