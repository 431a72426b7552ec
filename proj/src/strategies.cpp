#include "ctbench/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ctbench/error.hpp"

namespace ctbench {
namespace {

// Indices ordered best-first: descending prediction, ties by ascending index.
std::vector<std::size_t> rank_order(std::span<const double> p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    return order;
}

void check_finite(std::span<const double> p) {
    for (double v : p) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "non-finite prediction");
    }
}

std::vector<double> long_short(std::span<const double> p, std::size_t k) {
    const auto order = rank_order(p);
    std::vector<double> w(p.size(), 0.0);
    const double each = 0.5 / static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) {
        w[order[j]] = each;
        w[order[p.size() - 1 - j]] = -each;
    }
    return w;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void WeightMatrix::validate() const {
    for (std::size_t t = 0; t < values.cols(); ++t) {
        double gross = 0.0;
        for (std::size_t i = 0; i < values.rows(); ++i) {
            const double w = values(i, t);
            if (!std::isfinite(w)) throw Error(ErrorCode::InvalidValue, "non-finite weight");
            gross += std::abs(w);
        }
        if (gross > 1.0 + 1e-12) throw Error(ErrorCode::InvalidValue, "gross exposure above 1 at hour " + std::to_string(t));
    }
}

std::vector<double> EquityCurve::path() const {
    std::vector<double> out{initial};
    out.insert(out.end(), equity.begin(), equity.end());
    return out;
}

std::vector<double> EquityCurve::returns() const {
    std::vector<double> out(equity.size());
    double prev = initial;
    for (std::size_t t = 0; t < equity.size(); ++t) {
        out[t] = pnl[t] / prev;
        prev = equity[t];
    }
    return out;
}

std::vector<double> weights_csm(std::span<const double> predictions) {
    if (predictions.size() < 10) throw Error(ErrorCode::TooFewAssets, "CSM needs at least 10 assets");
    check_finite(predictions);
    return long_short(predictions, (predictions.size() + 9) / 10);
}

std::vector<double> weights_lotq(std::span<const double> predictions) {
    if (predictions.size() < 5) throw Error(ErrorCode::TooFewAssets, "LOTQ needs at least 5 assets");
    check_finite(predictions);
    const std::size_t k = (predictions.size() + 4) / 5;
    const auto order = rank_order(predictions);
    std::vector<double> w(predictions.size(), 0.0);
    for (std::size_t j = 0; j < k; ++j) w[order[j]] = 1.0 / static_cast<double>(k);
    return w;
}

std::vector<double> weights_pw(std::span<const double> predictions) {
    check_finite(predictions);
    double gross = 0.0;
    for (double v : predictions) gross += std::abs(v);
    if (gross == 0.0) throw Error(ErrorCode::DegeneratePredictions, "PW needs a non-zero prediction");
    std::vector<double> w(predictions.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = predictions[i] / gross;
    return w;
}

std::vector<double> weights_half_ls(std::span<const double> predictions) {
    if (predictions.size() < 2) throw Error(ErrorCode::TooFewAssets, "half long-short needs at least 2 assets");
    check_finite(predictions);
    return long_short(predictions, predictions.size() / 2);
}

StrategyFn strategy_by_name(const std::string& name) {
    if (name == "csm") return weights_csm;
    if (name == "lotq") return weights_lotq;
    if (name == "pw") return weights_pw;
    if (name == "half_ls") return weights_half_ls;
    throw Error(ErrorCode::InvalidValue, "unknown strategy '" + name + "'");
}

const std::vector<std::string>& predictive_strategy_names() {
    static const std::vector<std::string> names{"half_ls", "csm", "lotq", "pw"};
    return names;
}

WeightMatrix weights_from_predictions(const ReturnMatrix& predictions, const StrategyFn& strategy) {
    WeightMatrix out{predictions.assets, predictions.timestamps, Matrix(predictions.n(), predictions.l())};
    for (std::size_t t = 0; t < predictions.l(); ++t) {
        const auto column = predictions.values.column(t);
        const auto w = strategy(column);
        for (std::size_t i = 0; i < w.size(); ++i) out.values(i, t) = w[i];
    }
    return out;
}

EquityCurve simulate(const WeightMatrix& weights, const ReturnMatrix& test_returns, double fee, double initial) {
    if (weights.values.rows() != test_returns.n() || weights.values.cols() != test_returns.l()) {
        throw Error(ErrorCode::ShapeMismatch, "weights and returns differ in shape");
    }
    if (!(fee >= 0.0)) throw Error(ErrorCode::InvalidValue, "fee must be non-negative");
    if (!(initial > 0.0)) throw Error(ErrorCode::InvalidValue, "initial capital must be positive");

    const std::size_t n = test_returns.n();
    const std::size_t s = test_returns.l();
    EquityCurve curve;
    curve.initial = initial;
    curve.fee = fee;
    curve.timestamps = test_returns.timestamps;
    curve.equity.resize(s);
    curve.pnl.resize(s);
    curve.turnover.resize(s);

    double value = initial;
    for (std::size_t t = 0; t < s; ++t) {
        double growth = 1.0;
        double turnover = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = weights.values(i, t);
            const double prev = t == 0 ? 0.0 : weights.values(i, t - 1);
            growth += w * std::expm1(test_returns.values(i, t));
            turnover += std::abs(w - prev);
        }
        const double next = value * growth * (1.0 - fee * turnover);
        if (!(next > 0.0)) {
            throw Error(ErrorCode::Bankruptcy, "equity reached " + std::to_string(next) + " at hour " + std::to_string(t));
        }
        curve.pnl[t] = next - value;
        curve.equity[t] = next;
        curve.turnover[t] = turnover;
        value = next;
    }
    return curve;
}

std::string equity_csv(const EquityCurve& curve) {
    std::ostringstream out;
    out << "timestamp,equity,pnl,turnover\n";
    if (!curve.timestamps.empty()) {
        out << format_timestamp(curve.timestamps.front() - kHour) << ',' << fmt(curve.initial) << ",0,0\n";
    }
    for (std::size_t t = 0; t < curve.hours(); ++t) {
        out << format_timestamp(curve.timestamps[t]) << ',' << fmt(curve.equity[t]) << ',' << fmt(curve.pnl[t]) << ','
            << fmt(curve.turnover[t]) << '\n';
    }
    return out.str();
}

std::string equity_svg(const std::vector<std::pair<std::string, const EquityCurve*>>& curves, const std::string& title) {
    constexpr double width = 800, height = 400, margin = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    double lo = 0, hi = 0;
    std::size_t longest = 1;
    bool first = true;
    for (const auto& [name, c] : curves) {
        for (double v : c->path()) {
            const double y = std::log10(v);
            lo = first ? y : std::min(lo, y);
            hi = first ? y : std::max(hi, y);
            first = false;
        }
        longest = std::max(longest, c->hours());
    }
    if (hi - lo < 1e-6) {
        lo -= 0.01;
        hi += 0.01;
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << " (log scale)</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    char label[64];
    std::snprintf(label, sizeof label, "%.6g", std::pow(10.0, hi));
    svg << "<text x=\"2\" y=\"" << margin << "\" font-size=\"10\">" << label << "</text>\n";
    std::snprintf(label, sizeof label, "%.6g", std::pow(10.0, lo));
    svg << "<text x=\"2\" y=\"" << height - margin << "\" font-size=\"10\">" << label << "</text>\n";

    std::size_t k = 0;
    for (const auto& [name, c] : curves) {
        const auto p = c->path();
        svg << "<polyline fill=\"none\" stroke=\"" << palette[k % 6] << "\" stroke-width=\"1\" points=\"";
        for (std::size_t t = 0; t < p.size(); ++t) {
            const double x = margin + (width - 2 * margin) * static_cast<double>(t) / static_cast<double>(longest);
            const double y = height - margin - (height - 2 * margin) * (std::log10(p[t]) - lo) / (hi - lo);
            std::snprintf(label, sizeof label, "%.2f,%.2f ", x, y);
            svg << label;
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << width - margin - 150 << "\" y=\"" << margin + 14 * static_cast<double>(k)
            << "\" font-size=\"11\" fill=\"" << palette[k % 6] << "\">" << name << "</text>\n";
        ++k;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ctbench
