#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "ctbench/tsg.hpp"
#include "expect_code.hpp"
#include "oracles.hpp"

using namespace ctbench;

namespace {

double train_error(PcaModel& model, const ReturnMatrix& r) {
    const auto rec = model.reconstruct(r);
    double e = 0;
    for (std::size_t k = 0; k < r.values.data().size(); ++k) {
        const double d = rec.values.data()[k] - r.values.data()[k];
        e += d * d;
    }
    return e;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0;
    for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

}  // namespace

TEST(Passthrough, ReconstructIsIdentity) {
    const auto r = oracle::random_returns(4, 60, 1);
    PassthroughModel m;
    m.fit(r);
    EXPECT_TRUE(m.reconstruct(r).values == r.values);
    const auto other = oracle::random_returns(4, 9, 2);
    EXPECT_TRUE(m.reconstruct(other).values == other.values);
}

TEST(Passthrough, GenerateReplaysTrailingTrainingHours) {
    const auto r = oracle::random_returns(2, 10, 1);
    PassthroughModel m;
    m.fit(r);
    const auto g = m.generate(2, 4, 0);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(g.values(1, k), r.values(1, 6 + k));
    const auto full = m.generate(2, 10, 0);
    EXPECT_TRUE(full.values == r.values);
}

TEST(TsgContract, UntrainedModelRefuses) {
    GaussianModel g;
    EXPECT_CODE((void)g.generate(2, 3, 0), ErrorCode::NotTrained);
    EXPECT_CODE((void)g.reconstruct(oracle::random_returns(2, 3, 0)), ErrorCode::NotTrained);
}

TEST(TsgContract, UnsupportedModes) {
    const auto r = oracle::random_returns(3, 50, 1);
    PcaModel pca;
    pca.fit(r);
    EXPECT_CODE((void)pca.generate(3, 5, 0), ErrorCode::ModeUnsupported);
    BlockBootstrapModel bb;
    bb.fit(r);
    EXPECT_CODE((void)bb.reconstruct(r), ErrorCode::ModeUnsupported);
}

TEST(TsgContract, ReconstructShapeMismatch) {
    PassthroughModel m;
    m.fit(oracle::random_returns(3, 20, 1));
    EXPECT_CODE((void)m.reconstruct(oracle::random_returns(2, 20, 1)), ErrorCode::ShapeMismatch);
}

TEST(TsgContract, EmptyTrainingFails) {
    GaussianModel g;
    EXPECT_CODE(g.fit(ReturnMatrix{}), ErrorCode::FitFailed);
}

TEST(TsgContract, FitRecordsPositiveTimeAndTau) {
    GaussianModel g;
    g.fit(oracle::random_returns(3, 20, 1), 1234);
    EXPECT_GT(g.fit_seconds(), 0.0);
    EXPECT_EQ(g.tau(), 1234);
    EXPECT_TRUE(g.trained());
}

TEST(Gaussian, StoresMomentsAndRefitReplaces) {
    auto r = oracle::random_returns(2, 400, 3, 0.02);
    GaussianModel g;
    g.fit(r);
    double m0 = 0;
    for (std::size_t t = 0; t < r.l(); ++t) m0 += r.values(0, t);
    EXPECT_NEAR(g.means()[0], m0 / 400, 1e-15);
    for (auto& v : r.values.data()) v += 1.0;
    g.fit(r);
    EXPECT_NEAR(g.means()[0], m0 / 400 + 1.0, 1e-12);
}

TEST(Gaussian, SeededGenerationIsDeterministic) {
    GaussianModel g;
    g.fit(oracle::random_returns(3, 100, 4));
    EXPECT_TRUE(g.generate(3, 50, 9).values == g.generate(3, 50, 9).values);
    EXPECT_FALSE(g.generate(3, 50, 9).values == g.generate(3, 50, 10).values);
}

TEST(Gaussian, LargeSampleMatchesFittedMoments) {
    auto r = oracle::random_returns(1, 500, 5, 1.0);
    auto& v = r.values.data();
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 500;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / 500);
    for (double& x : v) x = (x - mean) / sd;
    GaussianModel g;
    g.fit(r);
    const auto s = g.generate(1, 100000, 77).values.data();
    const double sm = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    double sv = 0;
    for (double x : s) sv += (x - sm) * (x - sm);
    EXPECT_NEAR(sm, 0.0, 0.02);
    EXPECT_NEAR(std::sqrt(sv / s.size()), 1.0, 0.02);
}

TEST(Gaussian, ReconstructReturnsTrainingMean) {
    const auto r = oracle::random_returns(2, 80, 6);
    GaussianModel g;
    g.fit(r);
    const auto rec = g.reconstruct(oracle::random_returns(2, 10, 7));
    for (std::size_t t = 0; t < 10; ++t) EXPECT_EQ(rec.values(1, t), g.means()[1]);
}

TEST(BlockBootstrap, EveryColumnComesFromTraining) {
    const auto r = oracle::random_returns(3, 100, 8);
    BlockBootstrapModel bb;
    bb.fit(r);
    const auto g = bb.generate(3, 250, 5);
    std::set<std::vector<double>> columns;
    for (std::size_t t = 0; t < r.l(); ++t) columns.insert(r.values.column(t));
    for (std::size_t t = 0; t < g.l(); ++t) EXPECT_TRUE(columns.contains(g.values.column(t))) << t;
    EXPECT_TRUE(g.values == bb.generate(3, 250, 5).values);
}

TEST(Pca, FullRankIsIdentityAndZeroIsMean) {
    const auto r = oracle::random_returns(4, 120, 9);
    const auto other = oracle::random_returns(4, 30, 10);
    auto full = pca_fit_reconstruct(r, PcaComponents::fixed(4));
    EXPECT_LE(max_abs_diff(full->reconstruct(other).values, other.values), 1e-9);
    auto none = pca_fit_reconstruct(r, PcaComponents::fixed(0));
    const auto rec = none->reconstruct(other);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t t = 0; t < 30; ++t) EXPECT_EQ(rec.values(i, t), none->means()[i]);
    }
}

TEST(Pca, RankOneTrainingIsRecovered) {
    auto r = oracle::random_returns(5, 200, 11);
    const auto base = r.values.row(0);
    const std::vector<double> scale{1.0, -2.0, 0.5, 3.0, 1.5}, shift{0.01, -0.02, 0.0, 0.03, 0.005};
    Matrix m(5, 200);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t t = 0; t < 200; ++t) m(i, t) = scale[i] * base[t] + shift[i];
    }
    r.values = m;
    auto model = pca_fit_reconstruct(r, PcaComponents::fixed(1));
    EXPECT_LE(max_abs_diff(model->reconstruct(r).values, m), 1e-9);
    EXPECT_LE(max_abs_diff(oracle::pca_svd_reconstruct(m, m, 1), m), 1e-9);
}

TEST(Pca, MatchesSvdOracle) {
    const auto r = oracle::random_returns(6, 300, 12);
    const auto other = oracle::random_returns(6, 40, 13);
    for (std::size_t p = 0; p <= 6; ++p) {
        auto model = pca_fit_reconstruct(r, PcaComponents::fixed(p));
        EXPECT_LE(max_abs_diff(model->reconstruct(other).values, oracle::pca_svd_reconstruct(r.values, other.values, p)),
                  1e-12)
            << p;
    }
}

TEST(Pca, ExplainedVarianceSelection) {
    // Three orthogonal zero-mean patterns with variances 9, 0.5, 0.5 mixed by a rotation.
    const std::size_t w = 400;
    const double a[4] = {1, 1, -1, -1}, b[4] = {1, -1, 1, -1}, c[4] = {1, -1, -1, 1};
    const double s = 1 / std::sqrt(2.0), q = 1 / std::sqrt(6.0), u = 1 / std::sqrt(3.0);
    const double v1[3] = {u, u, u}, v2[3] = {s, -s, 0}, v3[3] = {q, q, -2 * q};
    auto r = oracle::random_returns(3, w, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t t = 0; t < w; ++t) {
            r.values(i, t) = 3 * a[t % 4] * v1[i] + std::sqrt(0.5) * b[t % 4] * v2[i] + std::sqrt(0.5) * c[t % 4] * v3[i];
        }
    }
    PcaModel model(PcaComponents::parse("ev90"));
    model.fit(r);
    EXPECT_EQ(model.component_count(), 1u);
    EXPECT_NEAR(model.eigenvalues()[0] / (model.eigenvalues()[0] + model.eigenvalues()[1] + model.eigenvalues()[2]), 0.9,
                1e-12);
    PcaModel wider(PcaComponents::parse("ev95"));
    wider.fit(r);
    EXPECT_EQ(wider.component_count(), 2u);
}

TEST(Pca, ConstantAssetGetsZeroLoadings) {
    auto r = oracle::random_returns(3, 100, 14);
    for (std::size_t t = 0; t < 100; ++t) r.values(1, t) = 0.004;
    PcaModel model(PcaComponents::fixed(2));
    model.fit(r);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(model.loadings()(1, k), 0.0);
    const auto rec = model.reconstruct(oracle::random_returns(3, 5, 15));
    for (std::size_t t = 0; t < 5; ++t) EXPECT_DOUBLE_EQ(rec.values(1, t), 0.004);
}

TEST(Pca, ErrorNonIncreasingInComponents) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = oracle::random_returns(5, 200, 100 + seed);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p <= 5; ++p) {
            PcaModel m(PcaComponents::fixed(p));
            m.fit(r);
            const double e = train_error(m, r);
            EXPECT_LE(e, prev + 1e-12);
            prev = e;
        }
    }
}

TEST(Pca, ReconstructionIsIdempotent) {
    const auto r = oracle::random_returns(5, 200, 16);
    PcaModel m(PcaComponents::fixed(2));
    m.fit(r);
    const auto once = m.reconstruct(r);
    const auto twice = m.reconstruct(once);
    EXPECT_LE(max_abs_diff(once.values, twice.values), 1e-9);
}

TEST(Pca, TooManyComponentsFails) {
    PcaModel m(PcaComponents::fixed(4));
    EXPECT_CODE(m.fit(oracle::random_returns(3, 50, 1)), ErrorCode::FitFailed);
}

TEST(PcaComponents, Parse) {
    EXPECT_EQ(PcaComponents::parse("3").to_string(), "3");
    EXPECT_EQ(PcaComponents::parse("ev97.5").to_string(), "ev97.5");
    EXPECT_CODE(PcaComponents::parse("evx"), ErrorCode::InvalidValue);
    EXPECT_CODE(PcaComponents::parse("-1"), ErrorCode::InvalidValue);
}

TEST(BuiltinModels, Specs) {
    for (const char* spec : {"passthrough", "gaussian", "block_bootstrap", "pca", "pca:2", "pca:ev80"}) {
        EXPECT_NE(make_builtin_model(spec), nullptr) << spec;
    }
    EXPECT_CODE(make_builtin_model("timegan"), ErrorCode::InvalidValue);
}

TEST(ExternalModel, MissingBundleIsReported) {
    ExternalModel m("ext", ExternalModel::BundleSource{oracle::temp_dir("missing")});
    const auto r = oracle::random_returns(2, 20, 1);
    m.fit(r, 20);
    EXPECT_CODE((void)m.reconstruct(r), ErrorCode::MissingBundle);
}

TEST(ExternalModel, CommandBridgeMatchesPassthrough) {
    const auto r = oracle::random_returns(3, 40, 2);
    const auto test = oracle::random_returns(3, 12, 3);
    ExternalModel ext("identity", ExternalModel::CommandSource{CTBENCH_BRIDGE, oracle::temp_dir("bridge")});
    PassthroughModel local;
    ext.fit(r, 40);
    local.fit(r, 40);
    EXPECT_TRUE(ext.reconstruct(r).values == local.reconstruct(r).values);
    EXPECT_TRUE(ext.reconstruct(test).values == local.reconstruct(test).values);
    EXPECT_TRUE(ext.generate(3, 25, 4).values == local.generate(3, 25, 4).values);
}

TEST(ExternalModel, FailingCommandIsReported) {
    ExternalModel ext("broken", ExternalModel::CommandSource{"false", oracle::temp_dir("broken")});
    const auto r = oracle::random_returns(2, 20, 1);
    ext.fit(r);
    EXPECT_CODE((void)ext.generate(2, 5, 0), ErrorCode::ExternalCommandFailed);
}
