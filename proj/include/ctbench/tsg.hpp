#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ctbench/market_data.hpp"

namespace ctbench {

struct ModeCapabilities {
    bool supports_generate = false;
    bool supports_reconstruct = false;
};

/// Contract every time-series generation model satisfies: fit on one
/// training window, then generate from noise and/or reconstruct inputs.
/// Refitting replaces the previous state entirely.
class TsgModel {
public:
    explicit TsgModel(std::string id) : id_(std::move(id)) {}
    virtual ~TsgModel() = default;
    TsgModel(const TsgModel&) = delete;
    TsgModel& operator=(const TsgModel&) = delete;

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] virtual ModeCapabilities capabilities() const = 0;

    /// `tau` is the split offset the window ends at (recorded, and used by
    /// external models to locate their bundles).
    void fit(const ReturnMatrix& train, std::int64_t tau = 0);

    [[nodiscard]] bool trained() const noexcept { return trained_; }
    [[nodiscard]] std::int64_t tau() const noexcept { return tau_; }
    [[nodiscard]] double fit_seconds() const noexcept { return fit_seconds_; }

    /// n x length synthetic returns; deterministic for a fixed seed.
    [[nodiscard]] ReturnMatrix generate(std::size_t n, std::size_t length, std::uint64_t seed) const;
    /// Same shape as `input`; deterministic.
    [[nodiscard]] ReturnMatrix reconstruct(const ReturnMatrix& input) const;

protected:
    virtual void do_fit(const ReturnMatrix& train) = 0;
    virtual Matrix do_generate(std::size_t length, std::uint64_t seed) const;
    virtual Matrix do_reconstruct(const ReturnMatrix& input) const;

    [[nodiscard]] const ReturnMatrix& training() const noexcept { return train_; }

private:
    std::string id_;
    ReturnMatrix train_;
    bool trained_ = false;
    std::int64_t tau_ = 0;
    double fit_seconds_ = 0.0;
};

/// Real data without a generator: generation replays the training window,
/// reconstruction is the identity.
class PassthroughModel final : public TsgModel {
public:
    PassthroughModel() : TsgModel("passthrough") {}
    ModeCapabilities capabilities() const override { return {true, true}; }

protected:
    void do_fit(const ReturnMatrix&) override {}
    Matrix do_generate(std::size_t length, std::uint64_t seed) const override;
    Matrix do_reconstruct(const ReturnMatrix& input) const override;
};

/// IID per-asset normal with moments matched to the training window.
/// Reconstruction returns the training mean, its best conditional estimate.
class GaussianModel final : public TsgModel {
public:
    GaussianModel() : TsgModel("gaussian") {}
    ModeCapabilities capabilities() const override { return {true, true}; }

    [[nodiscard]] const std::vector<double>& means() const noexcept { return mean_; }
    [[nodiscard]] const std::vector<double>& stds() const noexcept { return std_; }

protected:
    void do_fit(const ReturnMatrix& train) override;
    Matrix do_generate(std::size_t length, std::uint64_t seed) const override;
    Matrix do_reconstruct(const ReturnMatrix& input) const override;

private:
    std::vector<double> mean_;
    std::vector<double> std_;
};

/// Stitches blocks of consecutive training columns sampled with replacement.
class BlockBootstrapModel final : public TsgModel {
public:
    explicit BlockBootstrapModel(std::size_t block = 24) : TsgModel("block_bootstrap"), block_(block) {}
    ModeCapabilities capabilities() const override { return {true, false}; }

protected:
    void do_fit(const ReturnMatrix& train) override;
    Matrix do_generate(std::size_t length, std::uint64_t seed) const override;

private:
    std::size_t block_;
};

/// Component count: a fixed p, or the smallest p whose eigenvalue mass
/// reaches `explained_pct` percent.
struct PcaComponents {
    std::variant<std::size_t, double> value = 90.0;

    static PcaComponents fixed(std::size_t p) { return {p}; }
    static PcaComponents explained(double pct) { return {pct}; }
    /// "3", "ev90", "ev97.5"
    static PcaComponents parse(const std::string& text);
    [[nodiscard]] std::string to_string() const;
};

/// Reconstructs mean + projection of the demeaned input onto the top
/// principal axes of the training covariance. Zero-variance assets get zero
/// loadings, so they reconstruct to their training mean.
class PcaModel final : public TsgModel {
public:
    explicit PcaModel(PcaComponents components = {});
    ModeCapabilities capabilities() const override { return {false, true}; }

    [[nodiscard]] std::size_t component_count() const noexcept { return p_; }
    /// Descending eigenvalues of the covariance over non-degenerate assets.
    [[nodiscard]] const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
    [[nodiscard]] const std::vector<double>& means() const noexcept { return mean_; }
    /// n x p loadings.
    [[nodiscard]] const Matrix& loadings() const noexcept { return loadings_; }

protected:
    void do_fit(const ReturnMatrix& train) override;
    Matrix do_reconstruct(const ReturnMatrix& input) const override;

private:
    PcaComponents components_;
    std::size_t p_ = 0;
    std::vector<double> mean_;
    std::vector<double> eigenvalues_;
    Matrix loadings_;
};

std::unique_ptr<PcaModel> pca_fit_reconstruct(const ReturnMatrix& train, PcaComponents components);

/// Model served through the exchange-bundle protocol. Either reads
/// precomputed response bundles laid out as
///   <root>/tau_<tau>/{generate,reconstruct_train,reconstruct_test}/
/// or invokes `<command> --request <dir> --response <dir>` per call.
class ExternalModel final : public TsgModel {
public:
    struct BundleSource {
        std::filesystem::path root;
    };
    struct CommandSource {
        std::string command;
        std::filesystem::path work_dir;
    };

    ExternalModel(std::string id, std::variant<BundleSource, CommandSource> source,
                  ModeCapabilities caps = {true, true});
    ModeCapabilities capabilities() const override { return caps_; }

protected:
    void do_fit(const ReturnMatrix&) override {}
    Matrix do_generate(std::size_t length, std::uint64_t seed) const override;
    Matrix do_reconstruct(const ReturnMatrix& input) const override;

private:
    Matrix exchange(const std::string& tag, std::size_t length, std::uint64_t seed, const Matrix* input) const;

    std::variant<BundleSource, CommandSource> source_;
    ModeCapabilities caps_;
};

/// "passthrough", "gaussian", "block_bootstrap", "pca", "pca:<p>", "pca:ev<q>".
std::unique_ptr<TsgModel> make_builtin_model(const std::string& spec);

}  // namespace ctbench
