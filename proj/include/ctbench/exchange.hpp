#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctbench/matrix.hpp"

namespace ctbench {

inline constexpr int kBundleSchemaVersion = 1;

enum class BundleMode { Generate, Reconstruct };

std::string to_string(BundleMode mode);
BundleMode parse_bundle_mode(const std::string& text);

struct BundleManifest {
    int schema_version = kBundleSchemaVersion;
    std::string model_id;
    BundleMode mode = BundleMode::Generate;
    std::int64_t tau = 0;
    std::size_t n = 0;
    std::size_t length = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> asset_ids;

    friend bool operator==(const BundleManifest&, const BundleManifest&) = default;
};

/// One unit of the file exchange protocol: `manifest.json` plus
/// `payload.f64` (little-endian float64, row-major, n x length).
struct ExchangeBundle {
    BundleManifest manifest;
    Matrix payload;
};

void write_bundle(const ExchangeBundle& bundle, const std::filesystem::path& dir);
ExchangeBundle read_bundle(const std::filesystem::path& dir);

/// Bridge request layout: the manifest (with an extra `train_length` key),
/// `train.f64` holding the n x train_length training window, and for
/// reconstruct requests `payload.f64` holding the n x length input.
void write_request(const std::filesystem::path& dir, const BundleManifest& manifest, const Matrix& train,
                   const Matrix* payload);

/// Raw float64 matrix I/O used by bundles and bridge requests.
void write_f64(const Matrix& m, const std::filesystem::path& file);
Matrix read_f64(const std::filesystem::path& file, std::size_t rows, std::size_t cols);

}  // namespace ctbench
