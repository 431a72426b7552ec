#include "ctbench/ou.hpp"

#include <algorithm>
#include <cmath>

#include "ctbench/error.hpp"

namespace ctbench {

OuParams fit_ou(std::span<const double> series, double dt) {
    if (series.size() < 48) {
        throw Error(ErrorCode::InvalidArgument, "OU fit needs at least 48 observations, got " + std::to_string(series.size()));
    }
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "OU time step must be positive");
    for (double v : series) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "non-finite residual");
    }

    const std::size_t m = series.size() - 1;
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        mx += series[t];
        my += series[t + 1];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        sxx += (series[t] - mx) * (series[t] - mx);
        sxy += (series[t] - mx) * (series[t + 1] - my);
    }
    double scale = 0.0;
    for (double v : series) scale = std::max(scale, std::abs(v));
    const double floor = static_cast<double>(m) * (1e-14 * scale) * (1e-14 * scale);
    if (!(sxx > floor) || !(sxx > 1e-300)) throw Error(ErrorCode::DegenerateSeries, "residual series has no variation");

    const double b = sxy / sxx;
    const double a = my - b * mx;
    if (!(b > 0.0 && b < 1.0)) {
        throw Error(ErrorCode::NonMeanReverting, "AR(1) slope " + std::to_string(b) + " outside (0, 1)");
    }

    double see = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        const double e = series[t + 1] - a - b * series[t];
        see += e * e;
    }
    const double sd_e = std::sqrt(see / static_cast<double>(m));
    if (sd_e == 0.0) throw Error(ErrorCode::DegenerateSeries, "residual series is perfectly autoregressive");

    const double se_b = std::sqrt(see / static_cast<double>(m - 2) / sxx);
    const double df_stat = (b - 1.0) / se_b;
    if (df_stat > kUnitRootCritical) {
        throw Error(ErrorCode::NonMeanReverting, "AR(1) slope " + std::to_string(b) +
                                                     " is indistinguishable from a unit root (Dickey-Fuller t = " +
                                                     std::to_string(df_stat) + ")");
    }

    OuParams p;
    p.ar_slope = b;
    p.samples = series.size();
    p.theta = -std::log(b) / dt;
    p.mu = a / (1.0 - b);
    p.sigma = sd_e * std::sqrt(-2.0 * std::log(b) / (dt * (1.0 - b * b)));
    p.sigma_eq = p.sigma / std::sqrt(2.0 * p.theta);
    return p;
}

double s_score(double residual, const OuParams& params) { return (residual - params.mu) / params.sigma_eq; }

std::vector<double> s_score(std::span<const double> residuals, const OuParams& params) {
    std::vector<double> out(residuals.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s_score(residuals[i], params);
    return out;
}

std::vector<double> stat_arb_weights(std::span<const double> scores, double gamma, std::span<const char> eligible) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidValue, "threshold gamma must be positive");
    if (!eligible.empty() && eligible.size() != scores.size()) {
        throw Error(ErrorCode::ShapeMismatch, "eligibility mask length differs from scores");
    }
    std::vector<double> eta(scores.size(), 0.0);
    double gross = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!eligible.empty() && !eligible[i]) continue;
        if (std::abs(scores[i]) > gamma) {
            eta[i] = -scores[i];
            gross += std::abs(eta[i]);
        }
    }
    if (gross > 0.0) {
        for (double& w : eta) w /= gross;
    }
    return eta;
}

}  // namespace ctbench
