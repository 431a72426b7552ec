#include "ctbench/features.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ctbench/error.hpp"
#include "ctbench/rank.hpp"

namespace ctbench {
namespace {

enum class Kind { SmaRatio, EmaRatio, Momentum, Volatility, Rsi, BollingerPctB, ZScore, XsRankRet, XsRankVol, Lag };

struct CatalogEntry {
    FeatureSpec spec;
    Kind kind;
};

std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> c;
    auto add = [&](std::string name, std::vector<int> windows, FeatureFamily family, double neutral, Kind kind,
                   std::string description) {
        c.push_back({{std::move(name), std::move(windows), family, neutral, std::move(description)}, kind});
    };
    for (int w : {6, 24, 72}) {
        add("sma_ratio_" + std::to_string(w), {w}, FeatureFamily::Trend, 1.0, Kind::SmaRatio,
            "price over its simple moving average");
    }
    for (int w : {12, 48}) {
        add("ema_ratio_" + std::to_string(w), {w}, FeatureFamily::Trend, 1.0, Kind::EmaRatio,
            "price over its exponential moving average (alpha = 2/(span+1))");
    }
    for (int w : {6, 24, 72}) {
        add("momentum_" + std::to_string(w), {w}, FeatureFamily::Momentum, 0.0, Kind::Momentum,
            "rolling sum of log-returns");
    }
    for (int w : {24, 72}) {
        add("vol_" + std::to_string(w), {w}, FeatureFamily::Volatility, 0.0, Kind::Volatility,
            "rolling standard deviation of log-returns");
    }
    add("rsi_14", {14}, FeatureFamily::MeanReversion, 50.0, Kind::Rsi, "Wilder relative strength index");
    add("bollinger_pctb_20", {20}, FeatureFamily::MeanReversion, 0.5, Kind::BollingerPctB,
        "%B of 2-sigma bands on cumulative log-price");
    add("zscore_24", {24}, FeatureFamily::MeanReversion, 0.0, Kind::ZScore, "z-score of the latest return");
    add("xs_rank_ret_24", {24}, FeatureFamily::CrossSectional, 0.5, Kind::XsRankRet,
        "cross-sectional rank of trailing 24h return, scaled to [0, 1]");
    add("xs_rank_vol_24", {24}, FeatureFamily::CrossSectional, 0.5, Kind::XsRankVol,
        "cross-sectional rank of trailing 24h volatility, scaled to [0, 1]");
    add("ret_lag_1", {1}, FeatureFamily::Lag, 0.0, Kind::Lag, "log-return lagged 1 hour");
    add("ret_lag_24", {24}, FeatureFamily::Lag, 0.0, Kind::Lag, "log-return lagged 24 hours");
    return c;
}

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = build_catalog();
    return entries;
}

const CatalogEntry& lookup(const FeatureSpec& spec) {
    for (const auto& e : catalog_entries()) {
        if (e.spec.name == spec.name) {
            if (e.spec.windows != spec.windows) {
                throw Error(ErrorCode::UnknownFeature, "window parameters of " + spec.name + " differ from catalog");
            }
            return e;
        }
    }
    throw Error(ErrorCode::UnknownFeature, "no feature named '" + spec.name + "'");
}

std::size_t warmup_length(Kind kind, std::size_t w) {
    switch (kind) {
        case Kind::Rsi: return w - 1;
        case Kind::Lag: return w;
        default: return w - 1;
    }
}

using Series = std::vector<double>;

Series sma_ratio(std::span<const double> r, const Series& logp, std::size_t w) {
    Series out(r.size(), 1.0);
    for (std::size_t t = w - 1; t < r.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w; ++k) acc += std::exp(logp[t - k] - logp[t]);
        out[t] = 1.0 / (acc / static_cast<double>(w));
    }
    return out;
}

Series ema_ratio(std::span<const double> r, std::size_t span) {
    // q_t = EMA_t / P_t, updated without forming price levels.
    Series out(r.size(), 1.0);
    const double alpha = 2.0 / (static_cast<double>(span) + 1.0);
    double q = 1.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        q = alpha + (1.0 - alpha) * q * std::exp(-r[t]);
        if (t + 1 >= span) out[t] = 1.0 / q;
    }
    return out;
}

Series momentum(std::span<const double> r, std::size_t w) {
    Series out(r.size(), 0.0);
    for (std::size_t t = w - 1; t < r.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w; ++k) acc += r[t - k];
        out[t] = acc;
    }
    return out;
}

struct MeanStd {
    double mean;
    double sd;
};

MeanStd window_stats(const double* last, std::size_t w) {
    double mean = 0.0;
    for (std::size_t k = 0; k < w; ++k) mean += *(last - k);
    mean /= static_cast<double>(w);
    double ss = 0.0;
    for (std::size_t k = 0; k < w; ++k) ss += (*(last - k) - mean) * (*(last - k) - mean);
    return {mean, std::sqrt(ss / static_cast<double>(w))};
}

Series volatility(std::span<const double> r, std::size_t w) {
    Series out(r.size(), 0.0);
    for (std::size_t t = w - 1; t < r.size(); ++t) out[t] = window_stats(&r[t], w).sd;
    return out;
}

Series rsi(const Series& logp, std::size_t period) {
    Series out(logp.size(), 50.0);
    double prev_price = 1.0;
    double gain = 0.0;
    double loss = 0.0;
    const double p = static_cast<double>(period);
    for (std::size_t t = 0; t < logp.size(); ++t) {
        const double price = std::exp(logp[t]);
        const double change = price - prev_price;
        prev_price = price;
        const double up = change > 0.0 ? change : 0.0;
        const double down = change < 0.0 ? -change : 0.0;
        if (t < period) {
            gain += up;
            loss += down;
            if (t + 1 < period) continue;
            gain /= p;
            loss /= p;
        } else {
            gain = (gain * (p - 1.0) + up) / p;
            loss = (loss * (p - 1.0) + down) / p;
        }
        if (loss == 0.0) {
            out[t] = gain == 0.0 ? 50.0 : 100.0;
        } else {
            out[t] = 100.0 - 100.0 / (1.0 + gain / loss);
        }
    }
    return out;
}

bool negligible(double sd, double scale) { return sd <= 1e-12 * std::max(1.0, std::abs(scale)); }

Series bollinger_pctb(const Series& logp, std::size_t w) {
    Series out(logp.size(), 0.5);
    for (std::size_t t = w - 1; t < logp.size(); ++t) {
        const auto [mean, sd] = window_stats(&logp[t], w);
        if (negligible(sd, mean)) continue;
        out[t] = (logp[t] - (mean - 2.0 * sd)) / (4.0 * sd);
    }
    return out;
}

Series zscore(std::span<const double> r, std::size_t w) {
    Series out(r.size(), 0.0);
    for (std::size_t t = w - 1; t < r.size(); ++t) {
        const auto [mean, sd] = window_stats(&r[t], w);
        if (negligible(sd, mean)) continue;
        out[t] = (r[t] - mean) / sd;
    }
    return out;
}

Series lag(std::span<const double> r, std::size_t k) {
    Series out(r.size(), 0.0);
    for (std::size_t t = k; t < r.size(); ++t) out[t] = r[t - k];
    return out;
}

// Cross-sectional rank at every hour from `first` on, scaled to [0, 1].
std::vector<Series> xs_rank(const std::vector<Series>& per_asset, std::size_t first) {
    const std::size_t n = per_asset.size();
    const std::size_t l = n ? per_asset[0].size() : 0;
    std::vector<Series> out(n, Series(l, 0.5));
    if (n < 2) return out;
    std::vector<double> column(n);
    for (std::size_t t = first; t < l; ++t) {
        for (std::size_t i = 0; i < n; ++i) column[i] = per_asset[i][t];
        const auto ranks = average_ranks(column);
        for (std::size_t i = 0; i < n; ++i) out[i][t] = (ranks[i] - 1.0) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace

std::string to_string(FeatureFamily family) {
    switch (family) {
        case FeatureFamily::Trend: return "trend";
        case FeatureFamily::Momentum: return "momentum";
        case FeatureFamily::Volatility: return "volatility";
        case FeatureFamily::MeanReversion: return "mean_reversion";
        case FeatureFamily::CrossSectional: return "cross_sectional";
        case FeatureFamily::Lag: return "lag";
    }
    return "unknown";
}

FeatureTensor::FeatureTensor(std::vector<std::string> assets, std::vector<Timestamp> timestamps,
                             std::vector<std::string> names)
    : assets_(std::move(assets)), timestamps_(std::move(timestamps)), names_(std::move(names)),
      values_(assets_.size() * timestamps_.size() * names_.size(), 0.0) {}

const std::vector<FeatureSpec>& feature_catalog() {
    static const std::vector<FeatureSpec> specs = [] {
        std::vector<FeatureSpec> out;
        for (const auto& e : catalog_entries()) out.push_back(e.spec);
        return out;
    }();
    return specs;
}

std::vector<FeatureSpec> select_features(const std::vector<std::string>& names) {
    std::vector<FeatureSpec> out;
    for (const auto& name : names) {
        const auto& catalog = feature_catalog();
        auto it = std::find_if(catalog.begin(), catalog.end(), [&](const FeatureSpec& s) { return s.name == name; });
        if (it == catalog.end()) throw Error(ErrorCode::UnknownFeature, "no feature named '" + name + "'");
        out.push_back(*it);
    }
    return out;
}

FeatureTensor compute_features(const ReturnMatrix& returns, const std::vector<FeatureSpec>& specs) {
    std::vector<const CatalogEntry*> entries;
    std::vector<std::string> names;
    std::size_t max_window = 0;
    for (const auto& s : specs) {
        const auto& e = lookup(s);
        if (std::find(names.begin(), names.end(), s.name) != names.end()) {
            throw Error(ErrorCode::UnknownFeature, "duplicate feature '" + s.name + "'");
        }
        entries.push_back(&e);
        names.push_back(s.name);
        for (int w : s.windows) max_window = std::max(max_window, static_cast<std::size_t>(w));
    }
    const std::size_t n = returns.n();
    const std::size_t l = returns.l();
    if (l < max_window) {
        throw Error(ErrorCode::WindowTooLong, "feature window " + std::to_string(max_window) + " exceeds " +
                                                  std::to_string(l) + " hours of input");
    }

    FeatureTensor out(returns.assets, returns.timestamps, names);

    std::vector<Series> logp(n, Series(l));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = returns.values.row(i);
        std::partial_sum(r.begin(), r.end(), logp[i].begin());
    }

    auto needs = [&](Kind k) {
        return std::any_of(entries.begin(), entries.end(), [&](const CatalogEntry* e) { return e->kind == k; });
    };
    std::vector<Series> xs_ret, xs_vol;
    if (needs(Kind::XsRankRet)) {
        std::vector<Series> mom(n);
        for (std::size_t i = 0; i < n; ++i) mom[i] = momentum(returns.values.row(i), 24);
        xs_ret = xs_rank(mom, 23);
    }
    if (needs(Kind::XsRankVol)) {
        std::vector<Series> vol(n);
        for (std::size_t i = 0; i < n; ++i) vol[i] = volatility(returns.values.row(i), 24);
        xs_vol = xs_rank(vol, 23);
    }

    std::size_t warmup = 0;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        const auto& e = *entries[j];
        const auto w = static_cast<std::size_t>(e.spec.windows.front());
        warmup = std::max(warmup, warmup_length(e.kind, w));
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = returns.values.row(i);
            Series values;
            switch (e.kind) {
                case Kind::SmaRatio: values = sma_ratio(r, logp[i], w); break;
                case Kind::EmaRatio: values = ema_ratio(r, w); break;
                case Kind::Momentum: values = momentum(r, w); break;
                case Kind::Volatility: values = volatility(r, w); break;
                case Kind::Rsi: values = rsi(logp[i], w); break;
                case Kind::BollingerPctB: values = bollinger_pctb(logp[i], w); break;
                case Kind::ZScore: values = zscore(r, w); break;
                case Kind::XsRankRet: values = xs_ret[i]; break;
                case Kind::XsRankVol: values = xs_vol[i]; break;
                case Kind::Lag: values = lag(r, w); break;
            }
            for (std::size_t t = 0; t < l; ++t) out(i, t, j) = values[t];
        }
    }
    out.warmup = std::min(warmup, l);
    return out;
}

std::string catalog_json() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : feature_catalog()) {
        arr.push_back({{"name", s.name},
                       {"windows", s.windows},
                       {"family", to_string(s.family)},
                       {"neutral_value", s.neutral_value}});
    }
    return arr.dump(2);
}

}  // namespace ctbench
