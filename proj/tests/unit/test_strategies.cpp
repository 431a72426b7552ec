#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctbench/strategies.hpp"
#include "expect_code.hpp"
#include "oracles.hpp"

using namespace ctbench;

namespace {

WeightMatrix random_weights(std::size_t n, std::size_t s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    WeightMatrix w{{}, {}, Matrix(n, s)};
    for (std::size_t t = 0; t < s; ++t) {
        double gross = 0;
        for (std::size_t i = 0; i < n; ++i) gross += std::abs(w.values(i, t) = u(rng));
        for (std::size_t i = 0; i < n; ++i) w.values(i, t) /= gross;
    }
    return w;
}

WeightMatrix const_weights(std::size_t n, std::size_t s, double v) {
    return WeightMatrix{{}, {}, Matrix(n, s, v)};
}

}  // namespace

TEST(Csm, TwentyAssets) {
    std::vector<double> p(20);
    for (std::size_t i = 0; i < 20; ++i) p[i] = static_cast<double>(i) * 0.1;
    const auto w = weights_csm(p);
    EXPECT_EQ(w[19], 0.25);
    EXPECT_EQ(w[18], 0.25);
    EXPECT_EQ(w[0], -0.25);
    EXPECT_EQ(w[1], -0.25);
    for (std::size_t i = 2; i < 18; ++i) EXPECT_EQ(w[i], 0.0);
}

TEST(Csm, NineAssetsTooFew) {
    EXPECT_CODE(weights_csm(std::vector<double>(9, 0.0)), ErrorCode::TooFewAssets);
}

TEST(Csm, TiesBreakByAssetOrder) {
    const auto w = weights_csm(std::vector<double>(20, 0.01));
    EXPECT_EQ(w[0], 0.25);
    EXPECT_EQ(w[1], 0.25);
    EXPECT_EQ(w[18], -0.25);
    EXPECT_EQ(w[19], -0.25);
}

TEST(Lotq, Sizes) {
    std::vector<double> p{5, 4, 3, 2, 1, 0, -1, -2, -3, -4};
    auto w = weights_lotq(p);
    EXPECT_EQ(w[0], 0.5);
    EXPECT_EQ(w[1], 0.5);
    for (std::size_t i = 2; i < 10; ++i) EXPECT_EQ(w[i], 0.0);
    w = weights_lotq(std::vector<double>{1, 3, 2, 0, -1});
    EXPECT_EQ(w, (std::vector<double>{0, 1.0, 0, 0, 0}));
    std::reverse(p.begin(), p.end());
    w = weights_lotq(p);
    EXPECT_EQ(w[8], 0.5);
    EXPECT_EQ(w[9], 0.5);
    EXPECT_CODE(weights_lotq(std::vector<double>(4, 1.0)), ErrorCode::TooFewAssets);
}

TEST(Pw, Examples) {
    EXPECT_EQ(weights_pw(std::vector<double>{1, 1, 2}), (std::vector<double>{0.25, 0.25, 0.5}));
    EXPECT_EQ(weights_pw(std::vector<double>{1, -1}), (std::vector<double>{0.5, -0.5}));
    EXPECT_CODE(weights_pw(std::vector<double>{0, 0, 0}), ErrorCode::DegeneratePredictions);
}

TEST(HalfLs, Examples) {
    EXPECT_EQ(weights_half_ls(std::vector<double>{4, 3, 2, 1}), (std::vector<double>{0.25, 0.25, -0.25, -0.25}));
    const auto w = weights_half_ls(std::vector<double>{0.1, 0.5, 0.3, -0.2, 0.0});
    EXPECT_EQ(w[0], 0.0);
    EXPECT_EQ(w[1], 0.25);
    EXPECT_EQ(w[2], 0.25);
    EXPECT_EQ(w[3], -0.25);
    EXPECT_EQ(w[4], -0.25);
    EXPECT_EQ(weights_half_ls(std::vector<double>(4, 7.0)), (std::vector<double>{0.25, 0.25, -0.25, -0.25}));
}

TEST(Strategies, RankOnlyInvariance) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(10 + rng() % 40), q(p.size());
        for (auto& v : p) v = z(rng);
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = std::exp(3.0 * p[i]) + 7.0;
        EXPECT_EQ(weights_csm(p), weights_csm(q));
        EXPECT_EQ(weights_lotq(p), weights_lotq(q));
        EXPECT_EQ(weights_half_ls(p), weights_half_ls(q));
    }
}

TEST(Strategies, ByName) {
    for (const auto& name : predictive_strategy_names()) EXPECT_TRUE(strategy_by_name(name));
    EXPECT_CODE(strategy_by_name("momentum"), ErrorCode::InvalidValue);
}

TEST(WeightMatrix, GrossExposureBound) {
    WeightMatrix w = const_weights(3, 2, 0.4);
    EXPECT_CODE(w.validate(), ErrorCode::InvalidValue);
    w = const_weights(3, 2, 1.0 / 3.0);
    EXPECT_NO_THROW(w.validate());
}

TEST(Simulate, ZeroWeightsStayFlat) {
    const auto r = oracle::random_returns(4, 50, 1);
    const auto c = simulate(const_weights(4, 50, 0.0), r, 0.0003);
    for (double v : c.equity) EXPECT_EQ(v, 10000.0);
}

TEST(Simulate, ForcedArithmetic) {
    auto r = oracle::random_returns(1, 2, 1);
    r.values = Matrix(1, 2, std::log(1.01));
    const auto c = simulate(const_weights(1, 2, 1.0), r, 0.0);
    EXPECT_NEAR(c.final_equity(), 10201.0, 1e-9);
    EXPECT_NEAR(c.pnl[0], 100.0, 1e-9);
}

TEST(Simulate, EntryFeeDrag) {
    auto r = oracle::random_returns(2, 3, 1);
    r.values = Matrix(2, 3, 0.0);
    WeightMatrix w{{}, {}, Matrix(2, 3, 0.5)};
    const auto c = simulate(w, r, 0.0003);
    EXPECT_NEAR(c.equity[0], 9997.0, 1e-9);
    EXPECT_EQ(c.turnover[0], 1.0);
    EXPECT_EQ(c.turnover[1], 0.0);
    EXPECT_EQ(c.equity[2], c.equity[0]);
}

TEST(Simulate, FeeMonotonicity) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 10, s = 2 + rng() % 100;
        const auto w = random_weights(n, s, rng);
        const auto r = oracle::random_returns(n, s, rng(), 0.02);
        const auto cheap = simulate(w, r, 0.0);
        const auto dear = simulate(w, r, 0.0003);
        const auto dearer = simulate(w, r, 0.001);
        for (std::size_t t = 0; t < s; ++t) {
            EXPECT_LE(dear.equity[t], cheap.equity[t]);
            EXPECT_LE(dearer.equity[t], dear.equity[t]);
        }
    }
}

TEST(Simulate, CapitalScaleEquivariance) {
    std::mt19937_64 rng(3);
    const auto w = random_weights(5, 80, rng);
    const auto r = oracle::random_returns(5, 80, 4, 0.02);
    const auto base = simulate(w, r, 0.0003, 10000.0);
    for (double c : {0.5, 2.0, 1024.0}) {
        const auto scaled = simulate(w, r, 0.0003, 10000.0 * c);
        for (std::size_t t = 0; t < 80; ++t) {
            EXPECT_EQ(scaled.equity[t], c * base.equity[t]);
            EXPECT_EQ(scaled.pnl[t], c * base.pnl[t]);
        }
    }
}

TEST(Simulate, ZeroReturnMarketMovesOnlyThroughFees) {
    std::mt19937_64 rng(5);
    const auto w = random_weights(4, 30, rng);
    auto r = oracle::random_returns(4, 30, 6);
    r.values = Matrix(4, 30, 0.0);
    EXPECT_EQ(simulate(w, r, 0.0).final_equity(), 10000.0);
    const auto c = simulate(w, r, 0.0003);
    double v = 10000.0;
    for (std::size_t t = 0; t < 30; ++t) {
        v *= 1.0 - 0.0003 * c.turnover[t];
        EXPECT_NEAR(c.equity[t], v, 1e-9);
    }
}

TEST(Simulate, PnlConsistentWithEquity) {
    std::mt19937_64 rng(7);
    const auto w = random_weights(3, 40, rng);
    const auto c = simulate(w, oracle::random_returns(3, 40, 8, 0.03), 0.0003);
    double prev = c.initial;
    for (std::size_t t = 0; t < 40; ++t) {
        EXPECT_NEAR(c.equity[t] - prev, c.pnl[t], 1e-9 * c.equity[t]);
        prev = c.equity[t];
    }
}

TEST(Simulate, Bankruptcy) {
    auto r = oracle::random_returns(1, 2, 1);
    r.values = Matrix(1, 2, std::log(3.0));
    WeightMatrix w{{}, {}, Matrix(1, 2, -1.0)};
    EXPECT_CODE(simulate(w, r, 0.0), ErrorCode::Bankruptcy);
}

TEST(Simulate, ShapeAndFeeChecks) {
    const auto r = oracle::random_returns(2, 5, 1);
    EXPECT_CODE(simulate(const_weights(3, 5, 0.0), r, 0.0), ErrorCode::ShapeMismatch);
    EXPECT_CODE(simulate(const_weights(2, 5, 0.0), r, -0.1), ErrorCode::InvalidValue);
}

TEST(EquityExport, CsvAndSvg) {
    auto r = oracle::random_returns(1, 2, 1);
    r.values = Matrix(1, 2, std::log(1.01));
    const auto c = simulate(const_weights(1, 2, 1.0), r, 0.0);
    const auto csv = equity_csv(c);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "timestamp,equity,pnl,turnover");
    EXPECT_NE(csv.find("2021-01-01T00:00:00Z,10000,0,0"), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    const auto svg = equity_svg({{"half_ls", &c}}, "demo");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
    EXPECT_NE(svg.find("half_ls"), std::string::npos);
}
