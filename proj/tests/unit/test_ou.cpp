#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ctbench/ou.hpp"
#include "expect_code.hpp"
#include "oracles.hpp"

using namespace ctbench;

TEST(FitOu, RecoversExactSimulation) {
    const auto x = oracle::simulate_ou(0.10, 0.001, 0.02, 12000, 2024);
    const auto p = fit_ou(x);
    EXPECT_NEAR(p.theta, 0.10, 0.015);
    EXPECT_NEAR(p.sigma, 0.02, 0.001);
    // Standard error of the long-run mean is about 0.0018 at this length.
    EXPECT_NEAR(p.mu, 0.001, 4 * 0.0018);
    EXPECT_NEAR(p.sigma_eq, p.sigma / std::sqrt(2 * p.theta), 1e-12);
    EXPECT_GT(p.ar_slope, 0.0);
    EXPECT_LT(p.ar_slope, 1.0);
    EXPECT_EQ(p.samples, 12000u);
}

TEST(FitOu, AgreesWithGridLikelihood) {
    const auto x = oracle::simulate_ou(0.10, 0.001, 0.02, 12000, 7);
    const auto p = fit_ou(x);
    const auto g = oracle::ou_grid_likelihood(x, 0.05, 0.2, 3000);
    EXPECT_NEAR(p.theta / g.theta, 1.0, 0.01);
    EXPECT_NEAR(p.mu, g.mu, 1e-4);
    EXPECT_NEAR(p.sigma / g.sigma, 1.0, 0.01);
}

TEST(FitOu, TimeStepScalesRates) {
    const auto x = oracle::simulate_ou(0.10, 0.0, 0.02, 5000, 8);
    const auto hourly = fit_ou(x, 1.0);
    const auto daily = fit_ou(x, 24.0);
    EXPECT_NEAR(daily.theta * 24.0, hourly.theta, 1e-12);
    EXPECT_NEAR(daily.sigma_eq, hourly.sigma_eq, 1e-12);
}

TEST(FitOu, ConstantSeriesIsDegenerate) {
    EXPECT_CODE(fit_ou(std::vector<double>(100, 0.3)), ErrorCode::DegenerateSeries);
    EXPECT_CODE(fit_ou(std::vector<double>(100, 0.0)), ErrorCode::DegenerateSeries);
}

TEST(FitOu, ShortSeriesRejected) {
    EXPECT_CODE(fit_ou(std::vector<double>(47, 0.1)), ErrorCode::InvalidArgument);
}

TEST(FitOu, RandomWalkIsNonMeanReverting) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> z(0.0, 0.01);
    int rejected = 0;
    const int trials = 200;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> x(2000);
        for (std::size_t t = 1; t < x.size(); ++t) x[t] = x[t - 1] + z(rng);
        try {
            (void)fit_ou(x);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NonMeanReverting) ++rejected;
        }
    }
    EXPECT_GE(rejected, 0.95 * trials);
}

TEST(FitOu, NegativeSlopeIsNonMeanReverting) {
    std::vector<double> x(200);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = (t % 2 ? 1.0 : -1.0) * (1.0 + 0.01 * static_cast<double>(t % 7));
    EXPECT_CODE(fit_ou(x), ErrorCode::NonMeanReverting);
}

TEST(FitOu, ThetaErrorShrinksWithLength) {
    auto median_error = [](std::size_t length) {
        std::vector<double> errors;
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto x = oracle::simulate_ou(0.10, 0.0, 0.02, length, 1000 + s);
            errors.push_back(std::abs(fit_ou(x).theta - 0.10));
        }
        std::nth_element(errors.begin(), errors.begin() + 25, errors.end());
        return errors[25];
    };
    EXPECT_LT(median_error(10000), median_error(1000));
}

TEST(SScore, Examples) {
    OuParams p;
    p.mu = 0.002;
    p.theta = 0.2;
    p.sigma = 0.01;
    p.sigma_eq = 0.01 / std::sqrt(0.4);
    EXPECT_EQ(s_score(p.mu, p), 0.0);
    EXPECT_DOUBLE_EQ(s_score(p.mu + p.sigma_eq, p), 1.0);
    EXPECT_DOUBLE_EQ(s_score(p.mu - 2 * p.sigma_eq, p), -2.0);
    const std::vector<double> eps{p.mu, p.mu + p.sigma_eq};
    EXPECT_EQ(s_score(eps, p), (std::vector<double>{0.0, s_score(eps[1], p)}));
}

TEST(SScore, AffineEquivariance) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    OuParams p;
    p.mu = 0.0015;
    p.theta = 0.125;
    p.sigma = 0.03;
    p.sigma_eq = p.sigma / std::sqrt(2 * p.theta);
    for (int k = 0; k < 200; ++k) {
        const double e = u(rng);
        const double c = u(rng);
        OuParams shifted = p;
        shifted.mu += c;
        EXPECT_NEAR(s_score(e + c, shifted), s_score(e, p), 1e-9);
        for (double scale : {0.25, 2.0, 8.0}) {
            OuParams scaled = p;
            scaled.mu *= scale;
            scaled.sigma *= scale;
            scaled.sigma_eq *= scale;
            EXPECT_EQ(s_score(e * scale, scaled), s_score(e, p));
        }
    }
}

TEST(StatArbWeights, Examples) {
    const std::vector<double> s{3, -4, 1};
    const auto w = stat_arb_weights(s, 2.0);
    EXPECT_DOUBLE_EQ(w[0], -3.0 / 7.0);
    EXPECT_DOUBLE_EQ(w[1], 4.0 / 7.0);
    EXPECT_EQ(w[2], 0.0);
    const std::vector<double> calm{1.9, -2.0, 0.0};
    for (double v : stat_arb_weights(calm, 2.0)) EXPECT_EQ(v, 0.0);
    const std::vector<double> one{2.5};
    EXPECT_EQ(stat_arb_weights(one, 2.0), std::vector<double>{-1.0});
}

TEST(StatArbWeights, IneligibleAssetsStayFlat) {
    const std::vector<double> s{3, -4, 5};
    const std::vector<char> mask{1, 1, 0};
    const auto w = stat_arb_weights(s, 2.0, mask);
    EXPECT_DOUBLE_EQ(w[0], -3.0 / 7.0);
    EXPECT_EQ(w[2], 0.0);
}

TEST(StatArbWeights, InvalidGamma) {
    const std::vector<double> s{3};
    EXPECT_CODE(stat_arb_weights(s, 0.0), ErrorCode::InvalidValue);
}

TEST(StatArbWeights, GrossIsZeroOrOneAndSignsOppose) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z(0.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> s(1 + rng() % 30);
        for (auto& v : s) v = z(rng);
        const auto w = stat_arb_weights(s, 2.0);
        double gross = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            gross += std::abs(w[i]);
            if (s[i] > 2.0) EXPECT_LT(w[i], 0.0);
            if (s[i] < -2.0) EXPECT_GT(w[i], 0.0);
            if (std::abs(s[i]) <= 2.0) EXPECT_EQ(w[i], 0.0);
        }
        if (gross != 0.0) EXPECT_NEAR(gross, 1.0, 1e-15);
    }
}
