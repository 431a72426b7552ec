#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctbench/metrics.hpp"
#include "expect_code.hpp"
#include "oracles.hpp"

using namespace ctbench;

namespace {

std::vector<double> random_path(std::size_t hours, std::mt19937_64& rng, double sd = 0.01) {
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> path{10000.0};
    for (std::size_t t = 0; t < hours; ++t) path.push_back(path.back() * (1.0 + z(rng)));
    return path;
}

MetricsReport report(const std::string& model, const std::string& strategy, double fee, double sharpe, double mse) {
    MetricsReport r;
    r.model = model;
    r.task = "predictive_utility";
    r.strategy = strategy;
    r.fee = fee;
    r.year = "2022";
    r.sharpe = sharpe;
    r.mse = mse;
    return r;
}

}  // namespace

TEST(ErrorMetrics, Examples) {
    const auto a = oracle::random_returns(3, 10, 1);
    auto e = error_metrics(a, a);
    EXPECT_EQ(e.mse, 0.0);
    EXPECT_EQ(e.mae, 0.0);
    auto x = oracle::random_returns(1, 1, 0);
    auto y = x;
    x.values(0, 0) = 0.01;
    y.values(0, 0) = 0.03;
    e = error_metrics(x, y);
    EXPECT_NEAR(e.mse, 4e-4, 1e-18);
    EXPECT_NEAR(e.mae, 0.02, 1e-17);
    EXPECT_CODE(error_metrics(a, oracle::random_returns(3, 9, 1)), ErrorCode::ShapeMismatch);
}

TEST(ErrorMetrics, PooledMatchesDoubleLoop) {
    std::vector<ReturnMatrix> a, p;
    std::vector<Matrix> am, pm;
    for (std::uint64_t k = 0; k < 4; ++k) {
        a.push_back(oracle::random_returns(3, 50, 10 + k));
        p.push_back(oracle::random_returns(3, 50, 20 + k));
        am.push_back(a.back().values);
        pm.push_back(p.back().values);
    }
    const auto e = error_metrics(a, p);
    EXPECT_NEAR(e.mse, oracle::mse_loop(am, pm), 1e-12);
    EXPECT_NEAR(e.mae, oracle::mae_loop(am, pm), 1e-12);
}

TEST(RankMetrics, PerfectAndReversed) {
    const auto a = oracle::random_returns(6, 20, 1);
    auto r = rank_metrics(a.values, a.values);
    EXPECT_DOUBLE_EQ(r.ic, 1.0);
    EXPECT_TRUE(std::isinf(r.ir) && r.ir > 0);
    Matrix neg = a.values;
    for (auto& v : neg.data()) v = -v;
    r = rank_metrics(a.values, neg);
    EXPECT_DOUBLE_EQ(r.ic, -1.0);
}

TEST(RankMetrics, DegenerateHoursAreSkippedAndCounted) {
    auto a = oracle::random_returns(5, 10, 2);
    auto p = oracle::random_returns(5, 10, 3);
    for (std::size_t i = 0; i < 5; ++i) p.values(i, 4) = 0.1;
    const auto r = rank_metrics(a.values, p.values);
    EXPECT_EQ(r.degenerate_hours, 1u);
    EXPECT_TRUE(std::isnan(r.per_hour[4]));
    double mean = 0;
    for (std::size_t t = 0; t < 10; ++t) {
        if (t != 4) mean += r.per_hour[t];
    }
    EXPECT_NEAR(r.ic, mean / 9, 1e-15);
    const auto two = oracle::random_returns(2, 3, 4);
    EXPECT_EQ(rank_metrics(two.values, two.values).degenerate_hours, 3u);
}

TEST(RankMetrics, SpearmanMatchesBruteForce) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = oracle::random_returns(8, 5, rng());
        auto p = oracle::random_returns(8, 5, rng());
        p.values(3, 0) = p.values(5, 0);  // a tie
        const auto r = rank_metrics(a.values, p.values);
        for (std::size_t t = 0; t < 5; ++t) {
            EXPECT_NEAR(r.per_hour[t], oracle::spearman_rank_then_pearson(p.values.column(t), a.values.column(t)), 1e-12);
        }
    }
}

TEST(RankMetrics, InvariantUnderIncreasingTransform) {
    const auto a = oracle::random_returns(7, 30, 5);
    const auto p = oracle::random_returns(7, 30, 6);
    Matrix q = p.values;
    for (auto& v : q.data()) v = std::atan(50 * v) + v * v * v;
    const auto x = rank_metrics(a.values, p.values);
    const auto y = rank_metrics(a.values, q);
    EXPECT_EQ(x.per_hour, y.per_hour);
}

TEST(TradingMetrics, Examples) {
    std::vector<double> path(721, 10000.0);
    path.back() = 11000.0;
    const auto t = trading_metrics(path);
    EXPECT_NEAR(t.cagr, static_cast<double>(oracle::cagr_long(1.1L, 720.0L)), 1e-12);
    EXPECT_NEAR(t.cagr, 2.18868, 1e-5);

    std::vector<double> year(8761, 1.0);
    year.back() = 0.5;
    EXPECT_EQ(trading_metrics(year).cagr, -0.5);

    const std::vector<double> flat(100, 10000.0);
    const auto f = trading_metrics(flat);
    EXPECT_EQ(f.cagr, 0.0);
    EXPECT_TRUE(std::isnan(f.sharpe));
    EXPECT_CODE(trading_metrics(std::vector<double>{1.0, 2.0}), ErrorCode::InvalidArgument);
}

TEST(TradingMetrics, SharpeUsesPopulationStd) {
    const std::vector<double> path{100, 110, 99, 108.9};
    const std::vector<double> r{0.1, -0.1, 0.1};
    const double m = (0.1 - 0.1 + 0.1) / 3;
    double v = 0;
    for (double x : r) v += (x - m) * (x - m);
    EXPECT_NEAR(trading_metrics(path).sharpe, m / std::sqrt(v / 3) * std::sqrt(8760.0), 1e-9);
}

TEST(TradingMetrics, FullYearCagrIsSimpleReturn) {
    std::mt19937_64 rng(8);
    const auto path = random_path(8760, rng, 0.001);
    EXPECT_EQ(trading_metrics(path).cagr, path.back() / path.front() - 1.0);
}

TEST(RiskMetrics, Examples) {
    EXPECT_DOUBLE_EQ(max_drawdown(std::vector<double>{100, 120, 90, 110}), 0.25);
    EXPECT_EQ(max_drawdown(std::vector<double>{1, 2, 3, 4}), 0.0);

    std::vector<double> rets(100, 0.001);
    for (std::size_t k = 0; k < 5; ++k) rets[10 + 17 * k] = -0.02;
    std::vector<double> path{1000.0};
    for (double r : rets) path.push_back(path.back() * (1 + r));
    const auto risk = risk_metrics(path);
    EXPECT_NEAR(risk.var95, 0.02, 1e-12);
    EXPECT_NEAR(risk.es95, 0.02, 1e-12);
}

TEST(RiskMetrics, ShortSampleIsUndefined) {
    std::vector<double> path(20, 1.0);
    const auto r = risk_metrics(path);
    EXPECT_TRUE(std::isnan(r.var95));
    EXPECT_TRUE(std::isnan(r.es95));
    EXPECT_EQ(r.mdd, 0.0);
}

TEST(RiskMetrics, OraclesAndInvariants) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto path = random_path(20 + rng() % 300, rng);
        const auto r = risk_metrics(path);
        EXPECT_NEAR(r.mdd, oracle::mdd_pairs(path), 1e-12);
        const auto o = oracle::var_es_sorted(path_returns(path));
        EXPECT_NEAR(r.var95, o.var95, 1e-12);
        EXPECT_NEAR(r.es95, o.es95, 1e-12);
        EXPECT_GE(r.es95, r.var95);
        EXPECT_GE(r.mdd, 0.0);
        EXPECT_LE(r.mdd, 1.0);
        std::vector<double> scaled = path;
        for (auto& v : scaled) v *= 4.0;
        EXPECT_EQ(max_drawdown(scaled), r.mdd);
    }
}

TEST(TimingMetrics, MeanOfInferenceCalls) {
    PhaseRecords rec;
    rec.fit_seconds = 0.5;
    rec.infer_seconds = {1.0, 3.0};
    const auto t = timing_metrics(rec);
    EXPECT_EQ(t.train_time_s, 0.5);
    EXPECT_EQ(t.infer_time_s, 2.0);
    EXPECT_CODE(timing_metrics(PhaseRecords{std::nullopt, {1.0}}), ErrorCode::MissingPhase);
    EXPECT_CODE(timing_metrics(PhaseRecords{1.0, {}}), ErrorCode::MissingPhase);
}

TEST(RankModels, SharpeOrdering) {
    const auto t = rank_models({report("a", "pw", 0, 2, 1), report("b", "pw", 0, 1, 1), report("c", "pw", 0, 0, 1)});
    EXPECT_EQ(*t.rank("sharpe", "a"), 1.0);
    EXPECT_EQ(*t.rank("sharpe", "b"), 2.0);
    EXPECT_EQ(*t.rank("sharpe", "c"), 3.0);
    EXPECT_EQ(*t.rank("mse", "a"), 2.0);
}

TEST(RankModels, TiesShareAverageRank) {
    const auto t = rank_models({report("a", "pw", 0, 1, 0.5), report("b", "pw", 0, 2, 0.5)});
    EXPECT_EQ(*t.rank("mse", "a"), 1.5);
    EXPECT_EQ(*t.rank("mse", "b"), 1.5);
}

TEST(RankModels, LargerDrawdownRanksWorse) {
    auto a = report("a", "pw", 0, 1, 1), b = report("b", "pw", 0, 1, 1);
    a.mdd = 0.1;
    b.mdd = 0.3;
    const auto t = rank_models({a, b});
    EXPECT_EQ(*t.rank("mdd", "a"), 1.0);
    EXPECT_EQ(*t.rank("mdd", "b"), 2.0);
    EXPECT_EQ(t.orientation.at("mdd"), Orientation::LowerBetter);
    EXPECT_EQ(t.orientation.at("cagr"), Orientation::HigherBetter);
}

TEST(RankModels, AveragesOverStrategiesAndFees) {
    const auto t = rank_models({report("a", "pw", 0, 3, 1), report("a", "pw", 0.0003, -1, 1),
                                report("b", "pw", 0, 0.5, 1), report("b", "pw", 0.0003, 0.6, 1)});
    EXPECT_EQ(t.ranks.at("sharpe").at("a").mean_value, 1.0);
    EXPECT_EQ(*t.rank("sharpe", "a"), 1.0);
}

TEST(RankModels, UndefinedValuesExcludedWithCount) {
    auto a = report("a", "pw", 0, std::nan(""), 1), b = report("b", "pw", 0, 1, 1), c = report("c", "pw", 0, 2, 1);
    const auto t = rank_models({a, b, c});
    EXPECT_FALSE(t.rank("sharpe", "a").has_value());
    EXPECT_EQ(t.excluded.at("sharpe"), 1u);
    EXPECT_EQ(*t.rank("sharpe", "c"), 1.0);
    EXPECT_EQ(*t.rank("sharpe", "b"), 2.0);
}

TEST(RankModels, RanksArePermutations) {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> coarse(0, 3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<MetricsReport> reports;
        const int m = 2 + trial % 6;
        for (int k = 0; k < m; ++k) reports.push_back(report("m" + std::to_string(k), "pw", 0, coarse(rng), coarse(rng)));
        const auto t = rank_models(reports);
        for (const auto& metric : metric_names()) {
            double sum = 0;
            for (const auto& [model, e] : t.ranks.at(metric)) sum += e.rank;
            EXPECT_DOUBLE_EQ(sum, m * (m + 1) / 2.0);
        }
    }
}

TEST(RankModels, InconsistentGrouping) {
    auto a = report("a", "pw", 0, 1, 1), b = report("b", "pw", 0, 1, 1);
    b.year = "2023";
    EXPECT_CODE(rank_models({a, b}), ErrorCode::InconsistentGrouping);
    EXPECT_CODE(rank_models({report("a", "pw", 0, 1, 1), report("b", "lotq", 0, 1, 1)}), ErrorCode::InconsistentGrouping);
    EXPECT_CODE(rank_models({report("a", "pw", 0, 1, 1)}), ErrorCode::InvalidArgument);
}

TEST(ReportSerialization, SentinelsRoundTrip) {
    auto r = report("gaussian", "half_ls", 0.0003, std::nan(""), 1e-4);
    r.ir = std::numeric_limits<double>::infinity();
    r.var95 = std::nan("");
    r.train_time_s = 1.5;
    const auto text = report_json(r);
    EXPECT_NE(text.find("\"sharpe\": null"), std::string::npos);
    EXPECT_NE(text.find("\"ir\": \"inf\""), std::string::npos);
    EXPECT_EQ(text.find("train_time_s"), std::string::npos);
    const auto back = report_from_json(text);
    EXPECT_TRUE(std::isnan(back.sharpe));
    EXPECT_TRUE(std::isinf(back.ir));
    EXPECT_EQ(back.mse, 1e-4);
    EXPECT_EQ(back.fee, 0.0003);
    EXPECT_NE(report_json(r, true).find("train_time_s"), std::string::npos);
    const auto csv = reports_csv({r});
    EXPECT_NE(csv.find("gaussian,predictive_utility,half_ls,0.0003,2022"), std::string::npos);
}

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(0.0003), "0.0003");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}
