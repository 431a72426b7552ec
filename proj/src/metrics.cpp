#include "ctbench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ctbench/error.hpp"
#include "ctbench/rank.hpp"

namespace ctbench {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_shape(const ReturnMatrix& a, const ReturnMatrix& b) {
    if (a.n() != b.n() || a.l() != b.l()) throw Error(ErrorCode::ShapeMismatch, "actual and predicted shapes differ");
}

void check_paired(std::size_t a, std::size_t b) {
    if (a != b) throw Error(ErrorCode::ShapeMismatch, "actual and predicted slice counts differ");
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

bool constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

void hour_ics(const Matrix& actual, const Matrix& predicted, RankMetrics& out) {
    for (std::size_t t = 0; t < actual.cols(); ++t) {
        const auto a = actual.column(t);
        const auto p = predicted.column(t);
        if (a.size() < 3 || constant(a) || constant(p)) {
            out.per_hour.push_back(kNaN);
            ++out.degenerate_hours;
            continue;
        }
        out.per_hour.push_back(spearman(p, a));
    }
}

void summarise(RankMetrics& out) {
    std::vector<double> usable;
    for (double v : out.per_hour) {
        if (std::isfinite(v)) usable.push_back(v);
    }
    if (usable.empty()) {
        out.ic = kNaN;
        out.ir = kNaN;
        return;
    }
    out.ic = mean_of(usable);
    const double sd = population_std(usable, out.ic);
    if (sd == 0.0) {
        out.ir = out.ic == 0.0 ? kNaN : std::copysign(kInf, out.ic);
    } else {
        out.ir = out.ic / sd;
    }
}

nlohmann::json number_json(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from_json(const nlohmann::json& j) {
    if (j.is_null()) return kNaN;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw Error(ErrorCode::ParseError, "unexpected metric value '" + s + "'");
    }
    return j.get<double>();
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const double mag = std::abs(v);
    const bool fixed = mag == 0.0 || (mag >= 1e-6 && mag < 1e15);
    const auto res = fixed ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                           : std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

ErrorMetrics error_metrics(const ReturnMatrix& actual, const ReturnMatrix& predicted) {
    return error_metrics(std::span<const ReturnMatrix>(&actual, 1), std::span<const ReturnMatrix>(&predicted, 1));
}

ErrorMetrics error_metrics(std::span<const ReturnMatrix> actual, std::span<const ReturnMatrix> predicted) {
    check_paired(actual.size(), predicted.size());
    double se = 0.0, ae = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        check_same_shape(actual[k], predicted[k]);
        const auto& a = actual[k].values.data();
        const auto& p = predicted[k].values.data();
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double d = p[j] - a[j];
            se += d * d;
            ae += std::abs(d);
        }
        count += a.size();
    }
    if (count == 0) return {kNaN, kNaN};
    return {se / static_cast<double>(count), ae / static_cast<double>(count)};
}

RankMetrics rank_metrics(const Matrix& actual, const Matrix& predicted) {
    if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "actual and predicted shapes differ");
    }
    RankMetrics out;
    hour_ics(actual, predicted, out);
    summarise(out);
    return out;
}

RankMetrics rank_metrics(std::span<const ReturnMatrix> actual, std::span<const ReturnMatrix> predicted) {
    check_paired(actual.size(), predicted.size());
    RankMetrics out;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        check_same_shape(actual[k], predicted[k]);
        hour_ics(actual[k].values, predicted[k].values, out);
    }
    summarise(out);
    return out;
}

std::vector<double> path_returns(std::span<const double> path) {
    std::vector<double> out;
    for (std::size_t t = 1; t < path.size(); ++t) out.push_back((path[t] - path[t - 1]) / path[t - 1]);
    return out;
}

TradingMetrics trading_metrics(std::span<const double> path) {
    if (path.size() < 3) throw Error(ErrorCode::InvalidArgument, "trading metrics need at least 2 hours");
    const double s = static_cast<double>(path.size() - 1);
    TradingMetrics out;
    out.cagr = std::pow(path.back() / path.front(), kHoursPerYear / s) - 1.0;
    const auto rets = path_returns(path);
    const double m = mean_of(rets);
    const double sd = population_std(rets, m);
    out.sharpe = sd == 0.0 ? kNaN : m / sd * std::sqrt(kHoursPerYear);
    return out;
}

TradingMetrics trading_metrics(const EquityCurve& curve) {
    const auto p = curve.path();
    return trading_metrics(p);
}

double max_drawdown(std::span<const double> path) {
    double peak = -kInf;
    double worst = 0.0;
    for (double v : path) {
        peak = std::max(peak, v);
        worst = std::max(worst, (peak - v) / peak);
    }
    return worst;
}

RiskMetrics risk_metrics(std::span<const double> path) {
    RiskMetrics out;
    out.mdd = max_drawdown(path);
    auto rets = path_returns(path);
    if (rets.size() < kMinRiskSamples) {
        out.var95 = kNaN;
        out.es95 = kNaN;
        return out;
    }
    std::sort(rets.begin(), rets.end());
    const auto pos = static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(rets.size() - 1)));
    const double q = rets[pos];
    double tail = 0.0;
    std::size_t count = 0;
    for (double r : rets) {
        if (r > q) break;
        tail += r;
        ++count;
    }
    out.var95 = -q;
    out.es95 = -tail / static_cast<double>(count);
    return out;
}

RiskMetrics risk_metrics(const EquityCurve& curve) {
    const auto p = curve.path();
    return risk_metrics(p);
}

TimingMetrics timing_metrics(const PhaseRecords& records) {
    if (!records.fit_seconds) throw Error(ErrorCode::MissingPhase, "no fit phase recorded");
    if (records.infer_seconds.empty()) throw Error(ErrorCode::MissingPhase, "no generate/reconstruct phase recorded");
    return {*records.fit_seconds, mean_of(records.infer_seconds)};
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"mse", "mae", "ic", "ir", "cagr", "sharpe", "mdd", "var95", "es95"};
    return names;
}

const std::vector<std::string>& timing_metric_names() {
    static const std::vector<std::string> names{"train_time_s", "infer_time_s"};
    return names;
}

Orientation metric_orientation(const std::string& metric) {
    static const std::set<std::string> higher{"ic", "ir", "cagr", "sharpe"};
    static const std::set<std::string> lower{"mse", "mae", "mdd", "var95", "es95", "train_time_s", "infer_time_s"};
    if (higher.contains(metric)) return Orientation::HigherBetter;
    if (lower.contains(metric)) return Orientation::LowerBetter;
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
}

double MetricsReport::value(const std::string& metric) const {
    if (metric == "mse") return mse;
    if (metric == "mae") return mae;
    if (metric == "ic") return ic;
    if (metric == "ir") return ir;
    if (metric == "cagr") return cagr;
    if (metric == "sharpe") return sharpe;
    if (metric == "mdd") return mdd;
    if (metric == "var95") return var95;
    if (metric == "es95") return es95;
    if (metric == "train_time_s") return train_time_s.value_or(kNaN);
    if (metric == "infer_time_s") return infer_time_s.value_or(kNaN);
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
}

void MetricsReport::set(const std::string& metric, double v) {
    if (metric == "mse") mse = v;
    else if (metric == "mae") mae = v;
    else if (metric == "ic") ic = v;
    else if (metric == "ir") ir = v;
    else if (metric == "cagr") cagr = v;
    else if (metric == "sharpe") sharpe = v;
    else if (metric == "mdd") mdd = v;
    else if (metric == "var95") var95 = v;
    else if (metric == "es95") es95 = v;
    else if (metric == "train_time_s") train_time_s = v;
    else if (metric == "infer_time_s") infer_time_s = v;
    else throw Error(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
}

std::string report_json(const MetricsReport& r, bool with_timings) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["task"] = r.task;
    j["strategy"] = r.strategy;
    j["fee"] = r.fee;
    j["year"] = r.year;
    j["split_count"] = r.split_count;
    j["status"] = r.status;
    if (!r.error.empty()) j["error"] = r.error;
    for (const auto& m : metric_names()) j[m] = number_json(r.value(m));
    j["degenerate_hours"] = r.degenerate_hours;
    if (with_timings) {
        for (const auto& m : timing_metric_names()) j[m] = number_json(r.value(m));
    }
    return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    MetricsReport r;
    try {
        r.model = j.at("model").get<std::string>();
        r.task = j.at("task").get<std::string>();
        r.strategy = j.at("strategy").get<std::string>();
        r.fee = j.at("fee").get<double>();
        r.year = j.at("year").get<std::string>();
        r.split_count = j.at("split_count").get<std::size_t>();
        r.status = j.at("status").get<std::string>();
        r.error = j.value("error", std::string{});
        for (const auto& m : metric_names()) r.set(m, number_from_json(j.at(m)));
        r.degenerate_hours = j.value("degenerate_hours", std::size_t{0});
        for (const auto& m : timing_metric_names()) {
            if (j.contains(m)) r.set(m, number_from_json(j.at(m)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return r;
}

std::string reports_csv(const std::vector<MetricsReport>& reports) {
    std::ostringstream out;
    out << "model,task,strategy,fee,year,split_count,status";
    for (const auto& m : metric_names()) out << ',' << m;
    out << ",degenerate_hours\n";
    for (const auto& r : reports) {
        out << r.model << ',' << r.task << ',' << r.strategy << ',' << format_number(r.fee) << ',' << r.year << ','
            << r.split_count << ',' << r.status;
        for (const auto& m : metric_names()) out << ',' << format_number(r.value(m));
        out << ',' << r.degenerate_hours << '\n';
    }
    return out.str();
}

std::optional<double> RankTable::rank(const std::string& metric, const std::string& model) const {
    const auto m = ranks.find(metric);
    if (m == ranks.end()) return std::nullopt;
    const auto e = m->second.find(model);
    if (e == m->second.end()) return std::nullopt;
    return e->second.rank;
}

RankTable rank_models(const std::vector<MetricsReport>& reports, const std::vector<std::string>& metrics) {
    if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports to rank");
    std::map<std::string, std::set<std::pair<std::string, double>>> cells;
    std::map<std::string, std::vector<const MetricsReport*>> by_model;
    for (const auto& r : reports) {
        if (r.task != reports.front().task || r.year != reports.front().year) {
            throw Error(ErrorCode::InconsistentGrouping, "reports mix tasks or years");
        }
        if (!cells[r.model].insert({r.strategy, r.fee}).second) {
            throw Error(ErrorCode::InconsistentGrouping, "duplicate report for model " + r.model);
        }
        by_model[r.model].push_back(&r);
    }
    if (by_model.size() < 2) throw Error(ErrorCode::InvalidArgument, "ranking needs at least two models");
    for (auto& [model, list] : by_model) {
        std::sort(list.begin(), list.end(), [](const MetricsReport* a, const MetricsReport* b) {
            return std::tie(a->strategy, a->fee) < std::tie(b->strategy, b->fee);
        });
    }
    for (const auto& [model, set] : cells) {
        if (set != cells.begin()->second) {
            throw Error(ErrorCode::InconsistentGrouping, "model " + model + " covers different strategy/fee cells");
        }
    }

    RankTable table;
    table.metrics = metrics;
    for (const auto& [model, _] : by_model) table.models.push_back(model);
    for (const auto& metric : metrics) {
        const auto orient = metric_orientation(metric);
        table.orientation[metric] = orient;
        table.excluded[metric] = 0;
        std::vector<std::string> defined;
        std::vector<double> keys;
        for (const auto& [model, list] : by_model) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto* r : list) {
                const double v = r->value(metric);
                if (std::isfinite(v)) {
                    sum += v;
                    ++count;
                } else {
                    ++table.excluded[metric];
                }
            }
            if (count == 0) continue;
            const double mean = sum / static_cast<double>(count);
            table.ranks[metric][model].mean_value = mean;
            defined.push_back(model);
            keys.push_back(orient == Orientation::HigherBetter ? -mean : mean);
        }
        const auto r = average_ranks(keys);
        for (std::size_t k = 0; k < defined.size(); ++k) table.ranks[metric][defined[k]].rank = r[k];
    }
    return table;
}

std::string rank_table_csv(const RankTable& table) {
    std::ostringstream out;
    out << "metric,orientation,model,mean_value,rank,excluded_reports\n";
    for (const auto& metric : table.metrics) {
        const auto orient = table.orientation.at(metric) == Orientation::HigherBetter ? "higher" : "lower";
        const auto found = table.ranks.find(metric);
        for (const auto& model : table.models) {
            out << metric << ',' << orient << ',' << model << ',';
            if (found != table.ranks.end() && found->second.contains(model)) {
                const auto& e = found->second.at(model);
                out << format_number(e.mean_value) << ',' << format_number(e.rank);
            } else {
                out << ',';
            }
            out << ',' << table.excluded.at(metric) << '\n';
        }
    }
    return out.str();
}

}  // namespace ctbench
