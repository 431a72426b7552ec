#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ctbench {

/// Ornstein-Uhlenbeck parameters per hour: d(rho) = theta (mu - rho) dt + sigma dW.
struct OuParams {
    double theta = 0.0;     // mean-reversion speed, 1/hour
    double mu = 0.0;        // long-run mean
    double sigma = 0.0;     // diffusion volatility, per sqrt(hour)
    double sigma_eq = 0.0;  // sigma / sqrt(2 theta)
    double ar_slope = 0.0;  // fitted AR(1) slope b
    std::size_t samples = 0;
};

/// 1% critical value of the Dickey-Fuller t statistic (regression with a constant).
inline constexpr double kUnitRootCritical = -3.43;

/// Fits through the exact AR(1) discretisation:
///   rho_{t+1} = a + b rho_t + e,  theta = -ln b / dt,  mu = a / (1 - b),
///   sigma = std(e) sqrt(-2 ln b / (dt (1 - b^2))).
/// Throws DegenerateSeries (no variation) or NonMeanReverting (b outside
/// (0, 1), or a Dickey-Fuller statistic above kUnitRootCritical).
OuParams fit_ou(std::span<const double> series, double dt = 1.0);

/// (residual - mu) / sigma_eq
double s_score(double residual, const OuParams& params);
std::vector<double> s_score(std::span<const double> residuals, const OuParams& params);

/// Gate-then-normalise: eta_i = -s_i where |s_i| > gamma (0 elsewhere, and
/// 0 where `eligible` is given and false), then eta_i / sum_j |eta_j|.
std::vector<double> stat_arb_weights(std::span<const double> scores, double gamma,
                                     std::span<const char> eligible = {});

}  // namespace ctbench
