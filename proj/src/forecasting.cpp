#include "ctbench/forecasting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "ctbench/error.hpp"

namespace ctbench {

std::string to_string(ForecastAlgorithm algorithm) {
    return algorithm == ForecastAlgorithm::Gbdt ? "gbdt" : "ridge";
}

ForecastAlgorithm parse_forecast_algorithm(const std::string& text) {
    if (text == "gbdt") return ForecastAlgorithm::Gbdt;
    if (text == "ridge") return ForecastAlgorithm::Ridge;
    throw Error(ErrorCode::InvalidValue, "forecaster algorithm must be gbdt or ridge, got '" + text + "'");
}

void ForecasterConfig::validate() const {
    if (trees < 1) throw Error(ErrorCode::InvalidValue, "forecaster.trees must be >= 1");
    if (max_depth < 1) throw Error(ErrorCode::InvalidValue, "forecaster.max_depth must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw Error(ErrorCode::InvalidValue, "forecaster.learning_rate must lie in (0, 1]");
    }
    if (!(subsample > 0.0 && subsample <= 1.0)) throw Error(ErrorCode::InvalidValue, "forecaster.subsample must lie in (0, 1]");
    if (min_samples_leaf < 1) throw Error(ErrorCode::InvalidValue, "forecaster.min_samples_leaf must be >= 1");
    if (!(ridge_lambda >= 0.0)) throw Error(ErrorCode::InvalidValue, "forecaster.lambda must be >= 0");
}

TrainingSet build_training_set(const FeatureTensor& features, const ReturnMatrix& returns) {
    if (features.assets() != returns.assets || features.timestamps() != returns.timestamps) {
        throw Error(ErrorCode::ShapeMismatch, "features and returns cover different assets or hours");
    }
    const std::size_t n = features.n();
    const std::size_t l = features.l();
    const std::size_t d = features.d();
    if (l < 2 || n == 0) throw Error(ErrorCode::EmptyTrainingSet, "need at least two hours to pair features with targets");

    TrainingSet set;
    set.feature_names = features.names();
    set.x = Matrix(n * (l - 1), d);
    set.y.resize(n * (l - 1));
    std::size_t row = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t + 1 < l; ++t, ++row) {
            const auto cell = features.cell(i, t);
            std::copy(cell.begin(), cell.end(), set.x.row(row).begin());
            set.y[row] = returns.values(i, t + 1);
        }
    }
    return set;
}

// ---------------------------------------------------------------------------

namespace {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted, int max_depth, int min_leaf)
        : x_(x), sorted_(sorted), max_depth_(max_depth), min_leaf_(static_cast<std::size_t>(min_leaf)) {}

    /// Builds one tree on `residual` for rows with in_sample[row] != 0; leaf
    /// values are mean residuals (unscaled).
    TrainedForecaster::Tree build(const std::vector<double>& residual, const std::vector<char>& in_sample) {
        const std::size_t rows = x_.rows();
        TrainedForecaster::Tree tree(1);
        node_of_.assign(rows, -1);
        for (std::size_t r = 0; r < rows; ++r) {
            if (in_sample[r]) node_of_[r] = 0;
        }
        std::vector<int> open{0};
        for (int depth = 0; depth < max_depth_ && !open.empty(); ++depth) {
            const auto best = best_splits(residual, open, tree.size());
            std::vector<int> next;
            for (std::size_t k = 0; k < open.size(); ++k) {
                const int node = open[k];
                if (best[k].feature < 0) continue;
                const int left = static_cast<int>(tree.size());
                tree.push_back({});
                tree.push_back({});
                tree[node].feature = best[k].feature;
                tree[node].threshold = best[k].threshold;
                tree[node].left = left;
                tree[node].right = left + 1;
                next.push_back(left);
                next.push_back(left + 1);
            }
            for (std::size_t r = 0; r < rows; ++r) {
                const int node = node_of_[r];
                if (node < 0 || tree[node].feature < 0) continue;
                const auto& nd = tree[node];
                node_of_[r] = x_(r, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left : nd.right;
            }
            open = std::move(next);
        }
        std::vector<double> sum(tree.size(), 0.0);
        std::vector<std::size_t> count(tree.size(), 0);
        for (std::size_t r = 0; r < rows; ++r) {
            if (node_of_[r] < 0) continue;
            sum[node_of_[r]] += residual[r];
            ++count[node_of_[r]];
        }
        for (std::size_t k = 0; k < tree.size(); ++k) {
            if (tree[k].feature < 0 && count[k] > 0) tree[k].value = sum[k] / static_cast<double>(count[k]);
        }
        return tree;
    }

private:
    std::vector<SplitCandidate> best_splits(const std::vector<double>& residual, const std::vector<int>& open,
                                            std::size_t node_count) {
        // Map node id -> slot in `open`.
        std::vector<int> slot(node_count, -1);
        for (std::size_t k = 0; k < open.size(); ++k) slot[open[k]] = static_cast<int>(k);

        const std::size_t m = open.size();
        std::vector<double> total_sum(m, 0.0);
        std::vector<std::size_t> total_count(m, 0);
        for (std::size_t r = 0; r < x_.rows(); ++r) {
            const int node = node_of_[r];
            if (node < 0 || slot[node] < 0) continue;
            total_sum[slot[node]] += residual[r];
            ++total_count[slot[node]];
        }

        std::vector<SplitCandidate> best(m);
        std::vector<double> left_sum(m);
        std::vector<std::size_t> left_count(m);
        std::vector<double> last_value(m);
        for (std::size_t j = 0; j < x_.cols(); ++j) {
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            std::fill(left_count.begin(), left_count.end(), 0);
            for (std::uint32_t r : sorted_[j]) {
                const int node = node_of_[r];
                if (node < 0) continue;
                const int s = slot[node];
                if (s < 0) continue;
                const double v = x_(r, j);
                const std::size_t nl = left_count[s];
                const std::size_t nr = total_count[s] - nl;
                if (nl >= min_leaf_ && nr >= min_leaf_ && v > last_value[s]) {
                    const double sl = left_sum[s];
                    const double sr = total_sum[s] - sl;
                    const double gain = sl * sl / static_cast<double>(nl) + sr * sr / static_cast<double>(nr) -
                                        total_sum[s] * total_sum[s] / static_cast<double>(total_count[s]);
                    if (gain > best[s].gain) {
                        double threshold = last_value[s] + (v - last_value[s]) / 2.0;
                        if (threshold >= v) threshold = last_value[s];
                        best[s] = {gain, static_cast<int>(j), threshold};
                    }
                }
                left_sum[s] += residual[r];
                ++left_count[s];
                last_value[s] = v;
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<std::vector<std::uint32_t>>& sorted_;
    int max_depth_;
    std::size_t min_leaf_;
    std::vector<int> node_of_;
};

double eval_tree(const TrainedForecaster::Tree& tree, std::span<const double> x) {
    int node = 0;
    while (tree[node].feature >= 0) {
        node = x[static_cast<std::size_t>(tree[node].feature)] <= tree[node].threshold ? tree[node].left
                                                                                       : tree[node].right;
    }
    return tree[node].value;
}

// Little-endian blob helpers.
class BlobWriter {
public:
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t> bytes;
};

class BlobReader {
public:
    explicit BlobReader(std::span<const std::uint8_t> b) : bytes_(b) {}
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes_[pos_ + k]) << (8 * k);
        pos_ += 8;
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto len = u64();
        need(len);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }
    /// Element count for a sequence whose items take at least `item_bytes` each.
    std::size_t count(std::size_t item_bytes) {
        const auto k = u64();
        if (k > (bytes_.size() - pos_) / item_bytes) throw Error(ErrorCode::CorruptModel, "implausible length in forecaster blob");
        return static_cast<std::size_t>(k);
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::uint64_t k) const {
        if (k > bytes_.size() - pos_) throw Error(ErrorCode::CorruptModel, "truncated forecaster blob");
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

constexpr std::uint64_t kBlobMagic = 0x31304346'42544354ULL;  // "CTBFCF01"
constexpr std::uint64_t kBlobVersion = 1;

}  // namespace

TrainedForecaster fit_forecaster(const TrainingSet& data, const ForecasterConfig& config) {
    config.validate();
    const std::size_t rows = data.size();
    if (rows < 10 || data.x.rows() != rows) {
        throw Error(ErrorCode::EmptyTrainingSet, "forecaster needs at least 10 training rows, got " + std::to_string(rows));
    }
    if (data.x.cols() != data.feature_names.size()) {
        throw Error(ErrorCode::ShapeMismatch, "feature matrix width disagrees with feature names");
    }

    TrainedForecaster model;
    model.config_ = config;
    model.names_ = data.feature_names;

    const bool constant_target =
        std::all_of(data.y.begin(), data.y.end(), [&](double v) { return v == data.y.front(); });
    if (constant_target) {
        // Degenerate target: exact constant predictor.
        model.base_ = data.y.front();
        if (config.algorithm == ForecastAlgorithm::Ridge) model.coef_.assign(data.x.cols(), 0.0);
        return model;
    }

    const double mean_y = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(rows);
    const std::size_t d = data.x.cols();

    if (config.algorithm == ForecastAlgorithm::Ridge) {
        Eigen::VectorXd mean_x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < d; ++j) mean_x[static_cast<Eigen::Index>(j)] += data.x(r, j);
        }
        mean_x /= static_cast<double>(rows);
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        Eigen::VectorXd xc(static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < d; ++j) {
                xc[static_cast<Eigen::Index>(j)] = data.x(r, j) - mean_x[static_cast<Eigen::Index>(j)];
            }
            gram.selfadjointView<Eigen::Lower>().rankUpdate(xc);
            rhs += xc * (data.y[r] - mean_y);
        }
        gram = gram.selfadjointView<Eigen::Lower>();
        gram.diagonal().array() += config.ridge_lambda;
        const Eigen::VectorXd beta = gram.completeOrthogonalDecomposition().solve(rhs);
        model.coef_.assign(beta.data(), beta.data() + beta.size());
        model.base_ = mean_y - mean_x.dot(beta);
        return model;
    }

    // Gradient-boosted trees.
    std::vector<std::vector<std::uint32_t>> sorted(d, std::vector<std::uint32_t>(rows));
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(sorted[j].begin(), sorted[j].end(), 0u);
        std::stable_sort(sorted[j].begin(), sorted[j].end(),
                         [&](std::uint32_t a, std::uint32_t b) { return data.x(a, j) < data.x(b, j); });
    }

    model.base_ = mean_y;
    std::vector<double> pred(rows, mean_y);
    std::vector<double> residual(rows);
    std::vector<char> in_sample(rows, 1);
    std::mt19937_64 rng(config.seed);
    std::bernoulli_distribution keep(config.subsample);
    TreeBuilder builder(data.x, sorted, config.max_depth, config.min_samples_leaf);

    for (int k = 0; k < config.trees; ++k) {
        for (std::size_t r = 0; r < rows; ++r) residual[r] = data.y[r] - pred[r];
        if (config.subsample < 1.0) {
            for (auto& s : in_sample) s = keep(rng) ? 1 : 0;
        }
        auto tree = builder.build(residual, in_sample);
        for (auto& node : tree) node.value *= config.learning_rate;
        for (std::size_t r = 0; r < rows; ++r) pred[r] += eval_tree(tree, data.x.row(r));
        model.trees_.push_back(std::move(tree));
    }
    return model;
}

double TrainedForecaster::predict_row(std::span<const double> x) const {
    if (x.size() != names_.size()) throw Error(ErrorCode::FeatureMismatch, "feature vector has the wrong length");
    double out = base_;
    if (config_.algorithm == ForecastAlgorithm::Ridge) {
        for (std::size_t j = 0; j < coef_.size(); ++j) out += coef_[j] * x[j];
        return out;
    }
    for (const auto& tree : trees_) out += eval_tree(tree, x);
    return out;
}

std::vector<double> TrainedForecaster::predict(const FeatureTensor& features, std::size_t t) const {
    if (features.names() != names_) {
        throw Error(ErrorCode::FeatureMismatch, "feature list differs from the one the forecaster was trained on");
    }
    if (t >= features.l()) throw Error(ErrorCode::OffsetOutOfRange, "prediction hour outside the feature tensor");
    std::vector<double> out(features.n());
    for (std::size_t i = 0; i < features.n(); ++i) out[i] = predict_row(features.cell(i, t));
    return out;
}

std::vector<std::uint8_t> TrainedForecaster::serialize() const {
    BlobWriter w;
    w.u64(kBlobMagic);
    w.u64(kBlobVersion);
    w.u64(static_cast<std::uint64_t>(config_.algorithm));
    w.i64(config_.trees);
    w.i64(config_.max_depth);
    w.f64(config_.learning_rate);
    w.f64(config_.subsample);
    w.i64(config_.min_samples_leaf);
    w.f64(config_.ridge_lambda);
    w.u64(config_.seed);
    w.u64(names_.size());
    for (const auto& n : names_) w.str(n);
    w.f64(base_);
    w.u64(coef_.size());
    for (double c : coef_) w.f64(c);
    w.u64(trees_.size());
    for (const auto& tree : trees_) {
        w.u64(tree.size());
        for (const auto& node : tree) {
            w.i64(node.feature);
            w.f64(node.threshold);
            w.i64(node.left);
            w.i64(node.right);
            w.f64(node.value);
        }
    }
    return std::move(w.bytes);
}

TrainedForecaster TrainedForecaster::deserialize(std::span<const std::uint8_t> blob) {
    BlobReader r(blob);
    if (r.u64() != kBlobMagic) throw Error(ErrorCode::CorruptModel, "not a forecaster blob");
    if (r.u64() != kBlobVersion) throw Error(ErrorCode::CorruptModel, "unsupported forecaster blob version");
    TrainedForecaster m;
    const auto algo = r.u64();
    if (algo > 1) throw Error(ErrorCode::CorruptModel, "unknown forecaster algorithm");
    m.config_.algorithm = static_cast<ForecastAlgorithm>(algo);
    m.config_.trees = static_cast<int>(r.i64());
    m.config_.max_depth = static_cast<int>(r.i64());
    m.config_.learning_rate = r.f64();
    m.config_.subsample = r.f64();
    m.config_.min_samples_leaf = static_cast<int>(r.i64());
    m.config_.ridge_lambda = r.f64();
    m.config_.seed = r.u64();
    m.names_.resize(r.count(8));
    for (auto& n : m.names_) n = r.str();
    m.base_ = r.f64();
    m.coef_.resize(r.count(8));
    for (auto& c : m.coef_) c = r.f64();
    m.trees_.resize(r.count(8));
    for (auto& tree : m.trees_) {
        tree.resize(r.count(40));
        for (auto& node : tree) {
            node.feature = static_cast<int>(r.i64());
            node.threshold = r.f64();
            node.left = static_cast<int>(r.i64());
            node.right = static_cast<int>(r.i64());
            node.value = r.f64();
            const auto limit = static_cast<int>(tree.size());
            if (node.feature >= static_cast<int>(m.names_.size()) ||
                (node.feature >= 0 && (node.left <= 0 || node.left >= limit || node.right <= 0 || node.right >= limit))) {
                throw Error(ErrorCode::CorruptModel, "tree node out of range");
            }
        }
    }
    if (!r.done()) throw Error(ErrorCode::CorruptModel, "trailing bytes in forecaster blob");
    return m;
}

}  // namespace ctbench
