#include "ctbench/exchange.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ctbench/error.hpp"

namespace ctbench {
namespace fs = std::filesystem;

namespace {

static_assert(sizeof(double) == 8, "float64 payloads require IEEE doubles");

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t out = 0;
        for (int k = 0; k < 8; ++k) out |= ((v >> (8 * k)) & 0xFFu) << (8 * (7 - k));
        return out;
    }
}

}  // namespace

std::string to_string(BundleMode mode) { return mode == BundleMode::Generate ? "generate" : "reconstruct"; }

BundleMode parse_bundle_mode(const std::string& text) {
    if (text == "generate") return BundleMode::Generate;
    if (text == "reconstruct") return BundleMode::Reconstruct;
    throw Error(ErrorCode::BadManifest, "unknown bundle mode '" + text + "'");
}

void write_f64(const Matrix& m, const fs::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::UnreadableSource, "cannot write " + file.string());
    for (double v : m.data()) {
        const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out) throw Error(ErrorCode::UnreadableSource, "short write to " + file.string());
}

Matrix read_f64(const fs::path& file, std::size_t rows, std::size_t cols) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingBundle, "cannot open payload " + file.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (bytes != rows * cols * 8) {
        throw Error(ErrorCode::PayloadShapeMismatch, file.string() + " holds " + std::to_string(bytes / 8) +
                                                         " values, manifest expects " +
                                                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        std::uint64_t bits = 0;
        in.read(reinterpret_cast<char*>(&bits), sizeof bits);
        v = std::bit_cast<double>(to_little_endian(bits));
    }
    return m;
}

namespace {

nlohmann::json manifest_json(const BundleManifest& mf) {
    if (!mf.asset_ids.empty() && mf.asset_ids.size() != mf.n) {
        throw Error(ErrorCode::BadManifest, "asset_ids length disagrees with n");
    }
    return {{"schema_version", mf.schema_version},
            {"model_id", mf.model_id},
            {"mode", to_string(mf.mode)},
            {"tau", mf.tau},
            {"n", mf.n},
            {"length", mf.length},
            {"seed", mf.seed},
            {"asset_ids", mf.asset_ids}};
}

void write_manifest(const nlohmann::json& j, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::UnreadableSource, "cannot create " + dir.string());
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw Error(ErrorCode::UnreadableSource, "cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
}

}  // namespace

void write_bundle(const ExchangeBundle& bundle, const fs::path& dir) {
    const auto& mf = bundle.manifest;
    if (bundle.payload.rows() != mf.n || bundle.payload.cols() != mf.length) {
        throw Error(ErrorCode::PayloadShapeMismatch, "payload shape disagrees with manifest");
    }
    write_manifest(manifest_json(mf), dir);
    write_f64(bundle.payload, dir / "payload.f64");
}

void write_request(const fs::path& dir, const BundleManifest& manifest, const Matrix& train, const Matrix* payload) {
    if (train.rows() != manifest.n) throw Error(ErrorCode::PayloadShapeMismatch, "training window rows differ from n");
    if (payload && (payload->rows() != manifest.n || payload->cols() != manifest.length)) {
        throw Error(ErrorCode::PayloadShapeMismatch, "request payload shape disagrees with manifest");
    }
    auto j = manifest_json(manifest);
    j["train_length"] = train.cols();
    write_manifest(j, dir);
    write_f64(train, dir / "train.f64");
    if (payload) write_f64(*payload, dir / "payload.f64");
}

ExchangeBundle read_bundle(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error(ErrorCode::MissingBundle, "no manifest.json in " + dir.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadManifest, std::string("manifest is not JSON: ") + e.what());
    }

    ExchangeBundle b;
    auto& mf = b.manifest;
    try {
        mf.schema_version = j.at("schema_version").get<int>();
        if (mf.schema_version != kBundleSchemaVersion) {
            throw Error(ErrorCode::SchemaVersionUnsupported,
                        "bundle schema version " + std::to_string(mf.schema_version) + " is not supported");
        }
        mf.model_id = j.at("model_id").get<std::string>();
        mf.mode = parse_bundle_mode(j.at("mode").get<std::string>());
        mf.tau = j.at("tau").get<std::int64_t>();
        mf.n = j.at("n").get<std::size_t>();
        mf.length = j.at("length").get<std::size_t>();
        mf.seed = j.at("seed").get<std::uint64_t>();
        mf.asset_ids = j.value("asset_ids", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadManifest, std::string("malformed manifest: ") + e.what());
    }
    if (!mf.asset_ids.empty() && mf.asset_ids.size() != mf.n) {
        throw Error(ErrorCode::BadManifest, "asset_ids length disagrees with n");
    }
    b.payload = read_f64(dir / "payload.f64", mf.n, mf.length);
    return b;
}

}  // namespace ctbench
