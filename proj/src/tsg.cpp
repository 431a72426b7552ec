#include "ctbench/tsg.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "ctbench/error.hpp"
#include "ctbench/exchange.hpp"

namespace ctbench {
namespace fs = std::filesystem;

void TsgModel::fit(const ReturnMatrix& train, std::int64_t tau) {
    if (train.n() == 0 || train.l() == 0) throw Error(ErrorCode::FitFailed, id_ + ": empty training window");
    train.validate();
    trained_ = false;
    const auto start = std::chrono::steady_clock::now();
    train_ = train;
    tau_ = tau;
    do_fit(train_);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    fit_seconds_ = std::max(elapsed.count(), 1e-9);
    trained_ = true;
}

ReturnMatrix TsgModel::generate(std::size_t n, std::size_t length, std::uint64_t seed) const {
    if (!capabilities().supports_generate) throw Error(ErrorCode::ModeUnsupported, id_ + " cannot generate");
    if (!trained_) throw Error(ErrorCode::NotTrained, id_ + " must be fitted before generate");
    if (n != train_.n()) {
        throw Error(ErrorCode::ShapeMismatch, id_ + " was fitted on " + std::to_string(train_.n()) + " assets");
    }
    ReturnMatrix out;
    out.assets = train_.assets;
    // Synthetic hours are labelled as if they ended at the last training hour.
    const Timestamp last = train_.timestamps.back();
    out.timestamps.resize(length);
    for (std::size_t k = 0; k < length; ++k) out.timestamps[k] = last - kHour * static_cast<long>(length - 1 - k);
    out.values = do_generate(length, seed);
    if (out.values.rows() != n || out.values.cols() != length) {
        throw Error(ErrorCode::ShapeMismatch, id_ + " produced a wrongly shaped sample");
    }
    return out;
}

ReturnMatrix TsgModel::reconstruct(const ReturnMatrix& input) const {
    if (!capabilities().supports_reconstruct) throw Error(ErrorCode::ModeUnsupported, id_ + " cannot reconstruct");
    if (!trained_) throw Error(ErrorCode::NotTrained, id_ + " must be fitted before reconstruct");
    if (input.n() != train_.n()) {
        throw Error(ErrorCode::ShapeMismatch, id_ + ": input has " + std::to_string(input.n()) +
                                                  " assets, model was fitted on " + std::to_string(train_.n()));
    }
    ReturnMatrix out;
    out.assets = input.assets;
    out.timestamps = input.timestamps;
    out.values = do_reconstruct(input);
    if (out.values.rows() != input.n() || out.values.cols() != input.l()) {
        throw Error(ErrorCode::ShapeMismatch, id_ + " produced a wrongly shaped reconstruction");
    }
    return out;
}

Matrix TsgModel::do_generate(std::size_t, std::uint64_t) const {
    throw Error(ErrorCode::ModeUnsupported, id_ + " cannot generate");
}

Matrix TsgModel::do_reconstruct(const ReturnMatrix&) const {
    throw Error(ErrorCode::ModeUnsupported, id_ + " cannot reconstruct");
}

// ---------------------------------------------------------------------------

Matrix PassthroughModel::do_generate(std::size_t length, std::uint64_t) const {
    const Matrix& src = training().values;
    const std::size_t w = src.cols();
    Matrix out(src.rows(), length);
    // The trailing `length` training hours, wrapped around when length > w.
    const std::size_t shift = (w - length % w) % w;
    for (std::size_t i = 0; i < src.rows(); ++i) {
        for (std::size_t k = 0; k < length; ++k) out(i, k) = src(i, (shift + k) % w);
    }
    return out;
}

Matrix PassthroughModel::do_reconstruct(const ReturnMatrix& input) const { return input.values; }

// ---------------------------------------------------------------------------

void GaussianModel::do_fit(const ReturnMatrix& train) {
    mean_.assign(train.n(), 0.0);
    std_.assign(train.n(), 0.0);
    const double w = static_cast<double>(train.l());
    for (std::size_t i = 0; i < train.n(); ++i) {
        const auto row = train.values.row(i);
        mean_[i] = std::accumulate(row.begin(), row.end(), 0.0) / w;
        double ss = 0.0;
        for (double r : row) ss += (r - mean_[i]) * (r - mean_[i]);
        std_[i] = std::sqrt(ss / w);
    }
}

Matrix GaussianModel::do_generate(std::size_t length, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(mean_.size(), length);
    for (std::size_t i = 0; i < mean_.size(); ++i) {
        for (std::size_t t = 0; t < length; ++t) out(i, t) = mean_[i] + std_[i] * normal(rng);
    }
    return out;
}

Matrix GaussianModel::do_reconstruct(const ReturnMatrix& input) const {
    Matrix out(input.n(), input.l());
    for (std::size_t i = 0; i < input.n(); ++i) std::fill(out.row(i).begin(), out.row(i).end(), mean_[i]);
    return out;
}

// ---------------------------------------------------------------------------

void BlockBootstrapModel::do_fit(const ReturnMatrix&) {
    if (block_ == 0) throw Error(ErrorCode::FitFailed, "bootstrap block length must be >= 1");
}

Matrix BlockBootstrapModel::do_generate(std::size_t length, std::uint64_t seed) const {
    const Matrix& src = training().values;
    const std::size_t w = src.cols();
    const std::size_t block = std::min(block_, w);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, w - block);
    Matrix out(src.rows(), length);
    for (std::size_t filled = 0; filled < length;) {
        const std::size_t start = pick(rng);
        const std::size_t take = std::min(block, length - filled);
        for (std::size_t i = 0; i < src.rows(); ++i) {
            for (std::size_t k = 0; k < take; ++k) out(i, filled + k) = src(i, start + k);
        }
        filled += take;
    }
    return out;
}

// ---------------------------------------------------------------------------

PcaComponents PcaComponents::parse(const std::string& text) {
    try {
        if (text.rfind("ev", 0) == 0) {
            std::size_t used = 0;
            const double pct = std::stod(text.substr(2), &used);
            if (used != text.size() - 2 || !(pct > 0.0 && pct <= 100.0)) throw std::invalid_argument(text);
            return explained(pct);
        }
        std::size_t p = 0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), p);
        if (ec != std::errc{} || end != text.data() + text.size() || p == 0) throw std::invalid_argument(text);
        return fixed(p);
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidValue, "PCA components must be an integer or ev<percent>, got '" + text + "'");
    }
}

std::string PcaComponents::to_string() const {
    if (const auto* p = std::get_if<std::size_t>(&value)) return std::to_string(*p);
    const double pct = std::get<double>(value);
    std::string s = std::to_string(pct);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return "ev" + s;
}

PcaModel::PcaModel(PcaComponents components) : TsgModel("pca"), components_(components) {}

void PcaModel::do_fit(const ReturnMatrix& train) {
    const std::size_t n = train.n();
    const std::size_t w = train.l();
    if (const auto* p = std::get_if<std::size_t>(&components_.value); p && *p > n) {
        throw Error(ErrorCode::FitFailed, "PCA component count " + std::to_string(*p) + " exceeds asset count");
    }
    if (w < 2) throw Error(ErrorCode::FitFailed, "PCA needs at least two training hours");

    mean_.assign(n, 0.0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = train.values.row(i);
        mean_[i] = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(w);
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        if (*lo != *hi) active.push_back(i);
    }

    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd centered(m, static_cast<Eigen::Index>(w));
    for (Eigen::Index a = 0; a < m; ++a) {
        const std::size_t i = active[static_cast<std::size_t>(a)];
        for (std::size_t t = 0; t < w; ++t) centered(a, static_cast<Eigen::Index>(t)) = train.values(i, t) - mean_[i];
    }
    const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(w - 1);

    eigenvalues_.clear();
    Eigen::MatrixXd axes(m, 0);
    if (m > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) throw Error(ErrorCode::DegenerateCovariance, "eigen-decomposition failed");
        // Eigen sorts ascending; flip to descending.
        const Eigen::VectorXd ev = solver.eigenvalues().reverse();
        axes = solver.eigenvectors().rowwise().reverse();
        eigenvalues_.assign(ev.data(), ev.data() + ev.size());
    }

    if (const auto* p = std::get_if<std::size_t>(&components_.value)) {
        p_ = std::min(*p, active.size());
    } else {
        const double target = std::get<double>(components_.value) / 100.0;
        double total = 0.0;
        for (double v : eigenvalues_) total += std::max(v, 0.0);
        p_ = 0;
        double mass = 0.0;
        // Relative slack absorbs eigen-solver rounding on planted spectra.
        while (total > 0.0 && p_ < eigenvalues_.size() && mass < target * total * (1.0 - 1e-9)) {
            mass += std::max(eigenvalues_[p_], 0.0);
            ++p_;
        }
    }

    loadings_ = Matrix(n, p_);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (std::size_t k = 0; k < p_; ++k) {
            loadings_(active[static_cast<std::size_t>(a)], k) = axes(a, static_cast<Eigen::Index>(k));
        }
    }
}

Matrix PcaModel::do_reconstruct(const ReturnMatrix& input) const {
    const std::size_t n = input.n();
    Matrix out(n, input.l());
    std::vector<double> dev(n), score(p_);
    for (std::size_t t = 0; t < input.l(); ++t) {
        for (std::size_t i = 0; i < n; ++i) dev[i] = input.values(i, t) - mean_[i];
        for (std::size_t k = 0; k < p_; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += loadings_(i, k) * dev[i];
            score[k] = s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double proj = 0.0;
            for (std::size_t k = 0; k < p_; ++k) proj += loadings_(i, k) * score[k];
            out(i, t) = mean_[i] + proj;
        }
    }
    return out;
}

std::unique_ptr<PcaModel> pca_fit_reconstruct(const ReturnMatrix& train, PcaComponents components) {
    auto model = std::make_unique<PcaModel>(components);
    model->fit(train);
    return model;
}

// ---------------------------------------------------------------------------

ExternalModel::ExternalModel(std::string id, std::variant<BundleSource, CommandSource> source, ModeCapabilities caps)
    : TsgModel(std::move(id)), source_(std::move(source)), caps_(caps) {}

Matrix ExternalModel::do_generate(std::size_t length, std::uint64_t seed) const {
    return exchange("generate", length, seed, nullptr);
}

Matrix ExternalModel::do_reconstruct(const ReturnMatrix& input) const {
    const bool is_train = input.timestamps == training().timestamps;
    return exchange(is_train ? "reconstruct_train" : "reconstruct_test", input.l(), 0, &input.values);
}

Matrix ExternalModel::exchange(const std::string& tag, std::size_t length, std::uint64_t seed,
                               const Matrix* input) const {
    const BundleMode mode = input ? BundleMode::Reconstruct : BundleMode::Generate;
    const std::string split_dir = "tau_" + std::to_string(tau());
    fs::path response;

    if (const auto* bundles = std::get_if<BundleSource>(&source_)) {
        response = bundles->root / split_dir / tag;
    } else {
        const auto& cmd = std::get<CommandSource>(source_);
        const fs::path base = cmd.work_dir / id() / split_dir / (tag + "_seed" + std::to_string(seed));
        const fs::path request = base / "request";
        response = base / "response";
        std::error_code ec;
        fs::remove_all(response, ec);
        BundleManifest mf{kBundleSchemaVersion, id(), mode, tau(), training().n(), length, seed, training().assets};
        write_request(request, mf, training().values, input);
        const std::string line = cmd.command + " --request '" + request.string() + "' --response '" +
                                 response.string() + "'";
        const int rc = std::system(line.c_str());
        if (rc != 0) {
            throw Error(ErrorCode::ExternalCommandFailed, "'" + line + "' exited with status " + std::to_string(rc));
        }
    }

    if (!fs::exists(response / "manifest.json")) {
        throw Error(ErrorCode::MissingBundle, id() + ": no response bundle at " + response.string());
    }
    ExchangeBundle b = read_bundle(response);
    const auto& mf = b.manifest;
    if (mf.mode != mode) throw Error(ErrorCode::BadManifest, response.string() + ": unexpected mode");
    if (mf.n != training().n() || mf.length != length) {
        throw Error(ErrorCode::PayloadShapeMismatch, response.string() + ": bundle is " + std::to_string(mf.n) + "x" +
                                                         std::to_string(mf.length) + ", expected " +
                                                         std::to_string(training().n()) + "x" +
                                                         std::to_string(length));
    }
    if (!mf.asset_ids.empty() && mf.asset_ids != training().assets) {
        throw Error(ErrorCode::BadManifest, response.string() + ": asset ids differ from the training window");
    }
    return std::move(b.payload);
}

// ---------------------------------------------------------------------------

std::unique_ptr<TsgModel> make_builtin_model(const std::string& spec) {
    if (spec == "passthrough") return std::make_unique<PassthroughModel>();
    if (spec == "gaussian") return std::make_unique<GaussianModel>();
    if (spec == "block_bootstrap") return std::make_unique<BlockBootstrapModel>();
    if (spec == "pca") return std::make_unique<PcaModel>();
    if (spec.rfind("pca:", 0) == 0) return std::make_unique<PcaModel>(PcaComponents::parse(spec.substr(4)));
    throw Error(ErrorCode::InvalidValue, "unknown built-in model '" + spec + "'");
}

}  // namespace ctbench
