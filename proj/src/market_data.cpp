#include "ctbench/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ctbench/error.hpp"

namespace ctbench {
namespace fs = std::filesystem;

namespace {

struct Candle {
    Timestamp ts;
    std::array<double, 4> ohlc;
};

struct AssetSeries {
    std::string asset;
    std::vector<Candle> candles;
};

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        cells.push_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

double parse_price(std::string_view cell, const std::string& where) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::InvalidCandle, "unparseable price '" + std::string(cell) + "' at " + where);
    }
    return value;
}

AssetSeries read_candle_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::UnreadableSource, "cannot open " + path.string());

    AssetSeries series{path.stem().string(), {}};
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::UnreadableSource, "empty candle file " + path.string());
    const auto header = split_csv(line);
    const bool header_ok = (header.size() == 5 || header.size() == 6) && header[0] == "timestamp" &&
                           header[1] == "open" && header[2] == "high" && header[3] == "low" &&
                           header[4] == "close" && (header.size() == 5 || header[5] == "volume");
    if (!header_ok) {
        throw Error(ErrorCode::UnreadableSource,
                    "expected header timestamp,open,high,low,close[,volume] in " + path.string());
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        if (cells.size() != header.size()) throw Error(ErrorCode::InvalidCandle, "wrong column count at " + where);
        Candle c{parse_timestamp(cells[0]), {}};
        for (std::size_t k = 0; k < 4; ++k) c.ohlc[k] = parse_price(cells[k + 1], where);
        for (double p : c.ohlc) {
            if (!std::isfinite(p)) throw Error(ErrorCode::InvalidCandle, "non-finite price at " + where);
            if (p <= 0.0) throw Error(ErrorCode::NonPositivePrice, "price " + std::to_string(p) + " at " + where);
        }
        const auto [o, h, l, cl] = c.ohlc;
        if (l > std::min(o, cl) || h < std::max(o, cl)) {
            throw Error(ErrorCode::InvalidCandle, "high/low do not bracket open/close at " + where);
        }
        if (c.ts.time_since_epoch() % kHour != std::chrono::seconds{0}) {
            throw Error(ErrorCode::IrregularTimestamps, "timestamp not on an hour boundary at " + where);
        }
        if (!series.candles.empty() && c.ts <= series.candles.back().ts) {
            throw Error(ErrorCode::IrregularTimestamps, "timestamps not strictly increasing at " + where);
        }
        series.candles.push_back(c);
    }
    if (series.candles.empty()) throw Error(ErrorCode::UnreadableSource, "no candles in " + path.string());
    return series;
}

}  // namespace

ReturnMatrix ReturnMatrix::columns(std::size_t first, std::size_t count) const {
    if (first + count > l()) throw Error(ErrorCode::OffsetOutOfRange, "column range exceeds return matrix");
    ReturnMatrix out;
    out.assets = assets;
    out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(first),
                          timestamps.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.values = values.column_block(first, count);
    return out;
}

void ReturnMatrix::validate() const {
    if (assets.size() != values.rows() || timestamps.size() != values.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "return matrix labels do not match its shape");
    }
    for (double v : values.data()) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "non-finite return");
    }
}

ReturnMatrix concat_columns(const ReturnMatrix& left, const ReturnMatrix& right) {
    if (left.assets != right.assets) throw Error(ErrorCode::ShapeMismatch, "cannot concatenate different asset sets");
    ReturnMatrix out;
    out.assets = left.assets;
    out.timestamps = left.timestamps;
    out.timestamps.insert(out.timestamps.end(), right.timestamps.begin(), right.timestamps.end());
    out.values = Matrix(left.n(), left.l() + right.l());
    for (std::size_t i = 0; i < left.n(); ++i) {
        auto dst = out.values.row(i);
        std::copy(left.values.row(i).begin(), left.values.row(i).end(), dst.begin());
        std::copy(right.values.row(i).begin(), right.values.row(i).end(),
                  dst.begin() + static_cast<std::ptrdiff_t>(left.l()));
    }
    return out;
}

PriceTensor load_ohlc(const fs::path& source, const LoadOptions& options) {
    std::error_code ec;
    std::vector<fs::path> files;
    if (fs::is_directory(source, ec)) {
        for (const auto& entry : fs::directory_iterator(source, ec)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
        }
        if (ec) throw Error(ErrorCode::UnreadableSource, "cannot list " + source.string());
    } else if (fs::is_regular_file(source, ec)) {
        files.push_back(source);
    } else {
        throw Error(ErrorCode::UnreadableSource, "no such file or directory: " + source.string());
    }
    if (files.empty()) throw Error(ErrorCode::UnreadableSource, "no .csv candle files in " + source.string());
    std::sort(files.begin(), files.end());

    std::vector<AssetSeries> all;
    all.reserve(files.size());
    for (const auto& f : files) all.push_back(read_candle_file(f));

    PriceTensor out;

    // Span: the requested range, or the intersection of all asset ranges.
    Timestamp lo = options.start.value_or(Timestamp::min());
    Timestamp hi = options.end.value_or(Timestamp::max());
    if (!options.start || !options.end) {
        Timestamp first = Timestamp::min();
        Timestamp last = Timestamp::max();
        for (const auto& s : all) {
            first = std::max(first, s.candles.front().ts);
            last = std::min(last, s.candles.back().ts);
        }
        if (!options.start) lo = first;
        if (!options.end) hi = last;
    }
    if (lo > hi) throw Error(ErrorCode::NoCommonTimespan, "asset timestamp ranges do not overlap");
    // Align the span to whole hours.
    lo = std::chrono::ceil<std::chrono::hours>(lo);
    hi = std::chrono::floor<std::chrono::hours>(hi);
    if (lo > hi) throw Error(ErrorCode::NoCommonTimespan, "requested span contains no whole hour");
    const auto hours = static_cast<std::size_t>((hi - lo) / kHour) + 1;

    std::vector<const AssetSeries*> kept;
    for (const auto& s : all) {
        auto begin = std::lower_bound(s.candles.begin(), s.candles.end(), lo,
                                      [](const Candle& c, Timestamp t) { return c.ts < t; });
        auto end = std::upper_bound(s.candles.begin(), s.candles.end(), hi,
                                    [](Timestamp t, const Candle& c) { return t < c.ts; });
        const auto present = static_cast<std::size_t>(std::distance(begin, end));
        if (present != hours) {
            out.dropped.push_back({s.asset, std::to_string(hours - present) + " missing hour(s) in span"});
            continue;
        }
        kept.push_back(&s);
    }
    if (kept.empty()) throw Error(ErrorCode::NoCommonTimespan, "no asset covers the common span completely");

    std::sort(kept.begin(), kept.end(), [](const AssetSeries* a, const AssetSeries* b) { return a->asset < b->asset; });
    for (std::size_t i = 1; i < kept.size(); ++i) {
        if (kept[i]->asset == kept[i - 1]->asset) {
            throw Error(ErrorCode::UnreadableSource, "duplicate asset identifier " + kept[i]->asset);
        }
    }

    out.timestamps.resize(hours);
    for (std::size_t t = 0; t < hours; ++t) out.timestamps[t] = lo + kHour * static_cast<long>(t);
    for (auto& m : out.fields) m = Matrix(kept.size(), hours);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out.assets.push_back(kept[i]->asset);
        auto it = std::lower_bound(kept[i]->candles.begin(), kept[i]->candles.end(), lo,
                                   [](const Candle& c, Timestamp t) { return c.ts < t; });
        for (std::size_t t = 0; t < hours; ++t, ++it) {
            for (std::size_t k = 0; k < 4; ++k) out.fields[k](i, t) = it->ohlc[k];
        }
    }
    return out;
}

ReturnMatrix log_returns(const PriceTensor& prices) {
    if (prices.length() < 2) throw Error(ErrorCode::InvalidWindow, "need at least two timestamps for returns");
    const Matrix& close = prices.close();
    ReturnMatrix out;
    out.assets = prices.assets;
    out.timestamps.assign(prices.timestamps.begin() + 1, prices.timestamps.end());
    out.values = Matrix(prices.n(), prices.length() - 1);
    for (std::size_t i = 0; i < prices.n(); ++i) {
        for (std::size_t t = 1; t < prices.length(); ++t) {
            out.values(i, t - 1) = std::log(close(i, t) / close(i, t - 1));
        }
    }
    return out;
}

SplitPlan make_splits(std::size_t l, std::size_t w, std::size_t s) {
    if (w < 1 || s < 1) throw Error(ErrorCode::InvalidWindow, "window and step must be >= 1");
    if (w > l) throw Error(ErrorCode::InvalidWindow, "window longer than the return history");
    SplitPlan plan{w, s, {}};
    const std::size_t k = (l - w) / s;
    plan.offsets.reserve(k);
    for (std::size_t j = 0; j < k; ++j) plan.offsets.push_back(w + j * s);
    return plan;
}

SplitSlices split_slices(const ReturnMatrix& returns, std::size_t tau, std::size_t w, std::size_t s) {
    if (w < 1 || s < 1 || tau < w || tau + s > returns.l()) {
        throw Error(ErrorCode::OffsetOutOfRange, "split offset " + std::to_string(tau) + " out of range");
    }
    // 1-based columns tau-w+1..tau are 0-based tau-w..tau-1.
    return {returns.columns(tau - w, w), returns.columns(tau, s)};
}

StatsSummary descriptive_stats(const ReturnMatrix& returns) {
    if (returns.l() < 2) throw Error(ErrorCode::InvalidWindow, "descriptive statistics need l >= 2");
    StatsSummary out;

    // Accumulate in identifier order so results do not depend on row order.
    std::vector<std::size_t> order(returns.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return returns.assets[a] < returns.assets[b]; });

    std::array<double, 24> sum{};
    std::array<std::size_t, 24> count{};
    for (std::size_t i : order) {
        const auto row = returns.values.row(i);
        const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
        double ss = 0.0;
        for (double r : row) ss += (r - mean) * (r - mean);
        out.per_asset[returns.assets[i]] = {mean * 100.0, std::sqrt(ss / static_cast<double>(row.size())) * 100.0};
        for (std::size_t t = 0; t < row.size(); ++t) {
            const int h = utc_hour(returns.timestamps[t]);
            sum[h] += row[t];
            ++count[h];
        }
    }
    std::array<double, 24> sq{};
    for (std::size_t i : order) {
        const auto row = returns.values.row(i);
        for (std::size_t t = 0; t < row.size(); ++t) {
            const int h = utc_hour(returns.timestamps[t]);
            const double m = sum[h] / static_cast<double>(count[h]);
            sq[h] += (row[t] - m) * (row[t] - m);
        }
    }
    for (std::size_t h = 0; h < 24; ++h) {
        auto& b = out.by_hour[h];
        b.samples = count[h];
        if (count[h] == 0) continue;
        b.mean_pct = sum[h] / static_cast<double>(count[h]) * 100.0;
        b.vol_pct = std::sqrt(sq[h] / static_cast<double>(count[h])) * 100.0;
    }
    return out;
}

}  // namespace ctbench
