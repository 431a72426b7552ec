#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctbench/matrix.hpp"
#include "ctbench/time.hpp"

namespace ctbench {

enum class PriceField : std::size_t { Open = 0, High = 1, Low = 2, Close = 3 };

struct DroppedAsset {
    std::string asset;
    std::string reason;
};

/// OHLC candles for n assets over l+1 aligned hourly timestamps.
struct PriceTensor {
    std::vector<std::string> assets;
    std::vector<Timestamp> timestamps;
    std::array<Matrix, 4> fields;  // indexed by PriceField, each n x (l+1)
    std::vector<DroppedAsset> dropped;

    [[nodiscard]] std::size_t n() const noexcept { return assets.size(); }
    [[nodiscard]] std::size_t length() const noexcept { return timestamps.size(); }
    [[nodiscard]] const Matrix& field(PriceField f) const noexcept {
        return fields[static_cast<std::size_t>(f)];
    }
    [[nodiscard]] const Matrix& close() const noexcept { return field(PriceField::Close); }
};

/// n x l hourly log-returns. Column t holds the return realised over the
/// hour ending at timestamps[t].
struct ReturnMatrix {
    std::vector<std::string> assets;
    std::vector<Timestamp> timestamps;
    Matrix values;

    [[nodiscard]] std::size_t n() const noexcept { return values.rows(); }
    [[nodiscard]] std::size_t l() const noexcept { return values.cols(); }

    /// Columns [first, first + count) with matching timestamps.
    [[nodiscard]] ReturnMatrix columns(std::size_t first, std::size_t count) const;

    /// Throws ShapeMismatch / InvalidValue on inconsistent shape or non-finite cells.
    void validate() const;
};

/// Horizontal concatenation; assets must match.
ReturnMatrix concat_columns(const ReturnMatrix& left, const ReturnMatrix& right);

struct SplitPlan {
    std::size_t window = 0;
    std::size_t step = 0;
    std::vector<std::size_t> offsets;  // tau values, 1-based hour indices

    [[nodiscard]] std::size_t count() const noexcept { return offsets.size(); }
};

struct AssetStats {
    double mean_pct = 0.0;
    double vol_pct = 0.0;
};

struct HourBucket {
    double mean_pct = 0.0;
    double vol_pct = 0.0;
    std::size_t samples = 0;
};

struct StatsSummary {
    std::map<std::string, AssetStats> per_asset;
    std::array<HourBucket, 24> by_hour{};
};

struct LoadOptions {
    std::optional<Timestamp> start;  // inclusive
    std::optional<Timestamp> end;    // inclusive
};

/// Loads one `<ASSET>.csv` candle file or a directory of them. Assets are
/// sorted by identifier; assets with a missing hour inside the common span
/// are dropped and listed in `dropped`.
PriceTensor load_ohlc(const std::filesystem::path& source, const LoadOptions& options = {});

ReturnMatrix log_returns(const PriceTensor& prices);

/// Offsets {w, w+s, ..., w+(k-1)s} with k = floor((l-w)/s).
SplitPlan make_splits(std::size_t l, std::size_t w, std::size_t s);

struct SplitSlices {
    ReturnMatrix train;  // 1-based columns tau-w+1 .. tau
    ReturnMatrix test;   // 1-based columns tau+1 .. tau+s
};

/// `tau` uses the 1-based column convention of the split definition; the
/// slices are translated to 0-based storage here.
SplitSlices split_slices(const ReturnMatrix& returns, std::size_t tau, std::size_t w, std::size_t s);

StatsSummary descriptive_stats(const ReturnMatrix& returns);

}  // namespace ctbench
