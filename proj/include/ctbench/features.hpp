#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ctbench/market_data.hpp"

namespace ctbench {

enum class FeatureFamily { Trend, Momentum, Volatility, MeanReversion, CrossSectional, Lag };

std::string to_string(FeatureFamily family);

struct FeatureSpec {
    std::string name;
    std::vector<int> windows;  // hours
    FeatureFamily family = FeatureFamily::Trend;
    double neutral_value = 0.0;  // fill value for warm-up cells
    std::string description;
};

/// n x l x d feature values, stored asset-major: (i, t, j).
class FeatureTensor {
public:
    FeatureTensor() = default;
    FeatureTensor(std::vector<std::string> assets, std::vector<Timestamp> timestamps,
                  std::vector<std::string> names);

    [[nodiscard]] std::size_t n() const noexcept { return assets_.size(); }
    [[nodiscard]] std::size_t l() const noexcept { return timestamps_.size(); }
    [[nodiscard]] std::size_t d() const noexcept { return names_.size(); }

    double& operator()(std::size_t i, std::size_t t, std::size_t j) noexcept {
        return values_[(i * l() + t) * d() + j];
    }
    double operator()(std::size_t i, std::size_t t, std::size_t j) const noexcept {
        return values_[(i * l() + t) * d() + j];
    }
    /// Feature vector of asset i at hour t (length d).
    [[nodiscard]] std::span<const double> cell(std::size_t i, std::size_t t) const noexcept {
        return {values_.data() + (i * l() + t) * d(), d()};
    }

    [[nodiscard]] const std::vector<std::string>& assets() const noexcept { return assets_; }
    [[nodiscard]] const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    /// Leading hours in which at least one feature still holds its neutral fill.
    std::size_t warmup = 0;

    friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

private:
    std::vector<std::string> assets_;
    std::vector<Timestamp> timestamps_;
    std::vector<std::string> names_;
    std::vector<double> values_;
};

/// The built-in catalog. Every feature is computed from log-returns or the
/// cumulative log-price path, so real and synthetic inputs are handled alike.
const std::vector<FeatureSpec>& feature_catalog();

/// Looks up catalog entries by name (UnknownFeature on a miss).
std::vector<FeatureSpec> select_features(const std::vector<std::string>& names);

/// Causal: cell (i, t, .) depends only on columns <= t.
FeatureTensor compute_features(const ReturnMatrix& returns, const std::vector<FeatureSpec>& specs);

/// JSON array of {name, windows, family, neutral_value}.
std::string catalog_json();

}  // namespace ctbench
