#include "ctbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ctbench/error.hpp"
#include "ctbench/features.hpp"
#include "ctbench/market_data.hpp"

namespace ctbench {
namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw Error(ErrorCode::UnknownKey, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidValue, "'" + key + "' has the wrong type");
    }
}

std::size_t get_positive(const json& j, const std::string& key) {
    if (!j.is_number_integer() || j.get<std::int64_t>() <= 0) {
        throw Error(ErrorCode::InvalidValue, "'" + key + "' must be a positive integer");
    }
    return j.get<std::size_t>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

ModelSpec parse_model(const json& j, const fs::path& base) {
    ModelSpec spec;
    if (j.is_string()) {
        spec.id = j.get<std::string>();
        spec.builtin = spec.id;
        return spec;
    }
    if (!j.is_object()) throw Error(ErrorCode::InvalidValue, "model entries must be strings or objects");
    reject_unknown(j, {"id", "builtin", "bundle", "command", "generate", "reconstruct"}, "model");
    if (!j.contains("id")) throw Error(ErrorCode::InvalidValue, "model object needs an 'id'");
    spec.id = get_as<std::string>(j.at("id"), "id");
    const int sources = int(j.contains("builtin")) + int(j.contains("bundle")) + int(j.contains("command"));
    if (sources != 1) throw Error(ErrorCode::InvalidValue, "model '" + spec.id + "' needs exactly one of builtin/bundle/command");
    if (j.contains("builtin")) spec.builtin = get_as<std::string>(j.at("builtin"), "builtin");
    if (j.contains("bundle")) spec.bundle = resolve(base, get_as<std::string>(j.at("bundle"), "bundle"));
    if (j.contains("command")) spec.command = get_as<std::string>(j.at("command"), "command");
    if (j.contains("generate")) spec.capabilities.supports_generate = get_as<bool>(j.at("generate"), "generate");
    if (j.contains("reconstruct")) spec.capabilities.supports_reconstruct = get_as<bool>(j.at("reconstruct"), "reconstruct");
    return spec;
}

std::string sanitize(const std::string& text) {
    std::string out = text;
    for (char& c : out) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        if (!keep) c = '_';
    }
    return out;
}

void write_text(const fs::path& file, const std::string& text) {
    fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::UnreadableSource, "cannot write " + file.string());
    out << text;
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableSource, "cannot read " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string cell_stem(const std::string& task, const std::string& model, const std::string& strategy, double fee,
                      const std::string& year) {
    return task + "__" + sanitize(model) + "__" + strategy + "__fee" + format_number(fee) + "__" + year;
}

EquityCurve chain(const std::vector<const EquityCurve*>& parts) {
    EquityCurve out;
    out.initial = parts.front()->initial;
    out.fee = parts.front()->fee;
    double level = out.initial;
    for (const auto* part : parts) {
        const double scale = level / part->initial;
        for (std::size_t t = 0; t < part->hours(); ++t) {
            out.timestamps.push_back(part->timestamps[t]);
            out.equity.push_back(part->equity[t] * scale);
            out.pnl.push_back(part->pnl[t] * scale);
            out.turnover.push_back(part->turnover[t]);
        }
        level = out.final_equity();
    }
    return out;
}

std::uint64_t salt_for(std::size_t tau, const std::string& model) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : model) h = (h ^ c) * 1099511628211ULL;
    return derive_seed(h, tau);
}

std::vector<MetricsReport> load_reports(const fs::path& dir) {
    std::vector<fs::path> files;
    const fs::path metrics = dir / "metrics";
    if (!fs::is_directory(metrics)) throw Error(ErrorCode::UnreadableSource, "no metrics directory in " + dir.string());
    for (const auto& entry : fs::directory_iterator(metrics)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<MetricsReport> out;
    for (const auto& f : files) out.push_back(report_from_json(read_text(f)));
    return out;
}

std::vector<std::string> write_ranks(const fs::path& dir, const std::vector<MetricsReport>& reports) {
    std::vector<std::string> written;
    for (const auto& [key, table] : rank_by_group(reports, metric_names())) {
        const std::string rel = "ranks/" + key.first + "__" + key.second + ".csv";
        write_text(dir / rel, rank_table_csv(table));
        written.push_back(rel);
    }
    return written;
}

}  // namespace

std::unique_ptr<TsgModel> ModelSpec::instantiate(const fs::path& work_dir) const {
    if (!builtin.empty()) return make_builtin_model(builtin);
    if (!bundle.empty()) return std::make_unique<ExternalModel>(id, ExternalModel::BundleSource{bundle}, capabilities);
    return std::make_unique<ExternalModel>(id, ExternalModel::CommandSource{command, work_dir}, capabilities);
}

void BenchConfig::validate() const {
    if (data.empty()) throw Error(ErrorCode::InvalidValue, "'data' is required");
    if (window == 0 || test_predictive == 0 || test_stat_arb == 0) {
        throw Error(ErrorCode::InvalidValue, "window and test lengths must be positive");
    }
    if (models.empty()) throw Error(ErrorCode::InvalidValue, "at least one model is required");
    if (tasks.empty()) throw Error(ErrorCode::InvalidValue, "at least one task is required");
    if (fees.empty()) throw Error(ErrorCode::InvalidValue, "at least one fee scenario is required");
    for (double f : fees) {
        if (!std::isfinite(f) || f < 0.0) throw Error(ErrorCode::InvalidValue, "fees must be finite and non-negative");
    }
    if (!std::isfinite(gamma) || gamma <= 0.0) throw Error(ErrorCode::InvalidValue, "gamma must be positive");
    if (jobs == 0) throw Error(ErrorCode::InvalidValue, "jobs must be at least 1");
    std::set<std::string> ids;
    for (const auto& m : models) {
        if (m.id.empty()) throw Error(ErrorCode::InvalidValue, "model id must not be empty");
        if (!ids.insert(m.id).second) throw Error(ErrorCode::InvalidValue, "duplicate model id '" + m.id + "'");
        if (!m.builtin.empty()) {
            try {
                (void)make_builtin_model(m.builtin);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidValue, e.what());
            }
        }
    }
    if (strategies.empty()) throw Error(ErrorCode::InvalidValue, "at least one strategy is required");
    for (const auto& s : strategies) {
        const auto& known = predictive_strategy_names();
        if (std::find(known.begin(), known.end(), s) == known.end()) {
            throw Error(ErrorCode::InvalidValue, "unknown strategy '" + s + "'");
        }
    }
    forecaster.validate();
    if (!features.empty()) {
        try {
            (void)select_features(features);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidValue, e.what());
        }
    }
    if (start) (void)parse_timestamp(*start);
    if (end) (void)parse_timestamp(*end);
}

BenchConfig parse_config_text(const std::string& text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
    reject_unknown(j,
                   {"data", "start", "end", "window", "test_hours", "models", "tasks", "task", "strategies", "fees",
                    "gamma", "seed", "forecaster", "features", "output_dir", "jobs"},
                   "config");

    BenchConfig c;
    if (j.contains("data")) c.data = resolve(base_dir, get_as<std::string>(j["data"], "data"));
    if (j.contains("start")) c.start = get_as<std::string>(j["start"], "start");
    if (j.contains("end")) c.end = get_as<std::string>(j["end"], "end");
    if (j.contains("window")) c.window = get_positive(j["window"], "window");
    if (j.contains("test_hours")) {
        const auto& t = j["test_hours"];
        if (!t.is_object()) throw Error(ErrorCode::InvalidValue, "'test_hours' must be an object");
        reject_unknown(t, {"predictive_utility", "stat_arb"}, "test_hours");
        if (t.contains("predictive_utility")) c.test_predictive = get_positive(t["predictive_utility"], "test_hours");
        if (t.contains("stat_arb")) c.test_stat_arb = get_positive(t["stat_arb"], "test_hours");
    }
    if (j.contains("models")) {
        if (!j["models"].is_array()) throw Error(ErrorCode::InvalidValue, "'models' must be a list");
        for (const auto& m : j["models"]) c.models.push_back(parse_model(m, base_dir));
    }
    if (j.contains("task") && j.contains("tasks")) throw Error(ErrorCode::InvalidValue, "give either 'task' or 'tasks'");
    try {
        if (j.contains("task")) c.tasks = {parse_task(get_as<std::string>(j["task"], "task"))};
        if (j.contains("tasks")) {
            c.tasks.clear();
            for (const auto& t : get_as<std::vector<std::string>>(j["tasks"], "tasks")) c.tasks.push_back(parse_task(t));
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidValue, e.what());
    }
    if (j.contains("strategies")) c.strategies = get_as<std::vector<std::string>>(j["strategies"], "strategies");
    if (j.contains("fees")) c.fees = get_as<std::vector<double>>(j["fees"], "fees");
    if (j.contains("gamma")) c.gamma = get_as<double>(j["gamma"], "gamma");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw Error(ErrorCode::InvalidValue, "'seed' must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("forecaster")) {
        const auto& f = j["forecaster"];
        if (!f.is_object()) throw Error(ErrorCode::InvalidValue, "'forecaster' must be an object");
        reject_unknown(f, {"algorithm", "trees", "max_depth", "learning_rate", "subsample", "min_samples_leaf", "ridge_lambda"},
                       "forecaster");
        try {
            if (f.contains("algorithm")) c.forecaster.algorithm = parse_forecast_algorithm(get_as<std::string>(f["algorithm"], "algorithm"));
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidValue, e.what());
        }
        if (f.contains("trees")) c.forecaster.trees = get_as<int>(f["trees"], "trees");
        if (f.contains("max_depth")) c.forecaster.max_depth = get_as<int>(f["max_depth"], "max_depth");
        if (f.contains("learning_rate")) c.forecaster.learning_rate = get_as<double>(f["learning_rate"], "learning_rate");
        if (f.contains("subsample")) c.forecaster.subsample = get_as<double>(f["subsample"], "subsample");
        if (f.contains("min_samples_leaf")) c.forecaster.min_samples_leaf = get_as<int>(f["min_samples_leaf"], "min_samples_leaf");
        if (f.contains("ridge_lambda")) c.forecaster.ridge_lambda = get_as<double>(f["ridge_lambda"], "ridge_lambda");
    }
    if (j.contains("features")) c.features = get_as<std::vector<std::string>>(j["features"], "features");
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, get_as<std::string>(j["output_dir"], "output_dir"));
    if (j.contains("jobs")) c.jobs = get_positive(j["jobs"], "jobs");
    c.validate();
    return c;
}

BenchConfig parse_config(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::ParseError, "config file not found: " + path.string());
    return parse_config_text(read_text(path), path.parent_path());
}

std::string config_json(const BenchConfig& c, bool with_runtime) {
    ojson j;
    j["data"] = c.data.generic_string();
    j["start"] = c.start ? ojson(*c.start) : ojson(nullptr);
    j["end"] = c.end ? ojson(*c.end) : ojson(nullptr);
    j["window"] = c.window;
    j["test_hours"] = {{"predictive_utility", c.test_predictive}, {"stat_arb", c.test_stat_arb}};
    ojson models = ojson::array();
    for (const auto& m : c.models) {
        ojson mj;
        mj["id"] = m.id;
        if (!m.builtin.empty()) mj["builtin"] = m.builtin;
        if (!m.bundle.empty()) mj["bundle"] = m.bundle.generic_string();
        if (!m.command.empty()) mj["command"] = m.command;
        if (m.builtin.empty()) {
            mj["generate"] = m.capabilities.supports_generate;
            mj["reconstruct"] = m.capabilities.supports_reconstruct;
        }
        models.push_back(mj);
    }
    j["models"] = models;
    ojson tasks = ojson::array();
    for (auto t : c.tasks) tasks.push_back(to_string(t));
    j["tasks"] = tasks;
    j["strategies"] = c.strategies;
    j["fees"] = c.fees;
    j["gamma"] = c.gamma;
    j["seed"] = c.seed;
    j["forecaster"] = {{"algorithm", to_string(c.forecaster.algorithm)},
                       {"trees", c.forecaster.trees},
                       {"max_depth", c.forecaster.max_depth},
                       {"learning_rate", c.forecaster.learning_rate},
                       {"subsample", c.forecaster.subsample},
                       {"min_samples_leaf", c.forecaster.min_samples_leaf},
                       {"ridge_lambda", c.forecaster.ridge_lambda}};
    ojson features = ojson::array();
    if (c.features.empty()) {
        for (const auto& f : feature_catalog()) features.push_back(f.name);
    } else {
        for (const auto& f : c.features) features.push_back(f);
    }
    j["features"] = features;
    if (with_runtime) {
        j["output_dir"] = c.output_dir.generic_string();
        j["jobs"] = c.jobs;
    }
    return j.dump(2);
}

std::string config_hash(const BenchConfig& config) {
    const std::string text = config_json(config, false);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) h = (h ^ ch) * 1099511628211ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

YearlyAggregate aggregate_yearly(const std::vector<CellOutcome>& cells,
                                 const std::map<TaskKind, std::vector<std::string>>& strategies,
                                 const std::vector<double>& fees, const std::vector<std::string>& years) {
    if (cells.empty()) throw Error(ErrorCode::EmptyYear, "no splits to aggregate");
    // (task, year, model) -> cells ordered by tau
    std::map<std::tuple<TaskKind, std::string, std::string>, std::vector<const CellOutcome*>> groups;
    std::set<std::string> present;
    for (const auto& c : cells) {
        groups[{c.task, c.year, c.model}].push_back(&c);
        present.insert(c.year);
    }
    for (const auto& y : years) {
        if (!present.contains(y)) throw Error(ErrorCode::EmptyYear, "no split has its test window starting in " + y);
    }
    const std::set<std::string> wanted(years.begin(), years.end());

    YearlyAggregate out;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto& [key, list] : groups) {
        const auto& [task, year, model] = key;
        if (!wanted.empty() && !wanted.contains(year)) continue;
        std::sort(list.begin(), list.end(), [](const CellOutcome* a, const CellOutcome* b) { return a->tau < b->tau; });
        const std::string task_name = to_string(task);

        const CellOutcome* failed = nullptr;
        bool skipped = false;
        for (const auto* c : list) {
            if (c->status == "skipped") skipped = true;
            else if (c->status != "ok" && !failed) failed = c;
        }

        std::vector<ReturnMatrix> actual, predicted, signal;
        if (!failed && !skipped) {
            PhaseRecords phases;
            double fit_total = 0.0;
            for (const auto* c : list) {
                actual.push_back(c->result->actual);
                predicted.push_back(c->result->predictions);
                signal.push_back(c->result->signal);
                fit_total += c->result->timings.fit_seconds;
                for (double v : c->result->timings.infer_seconds) phases.infer_seconds.push_back(v);
            }
            phases.fit_seconds = fit_total / static_cast<double>(list.size());
            out.timings[{task_name, model, year}] = timing_metrics(phases);
        }

        const auto strat_it = strategies.find(task);
        if (strat_it == strategies.end()) continue;
        for (const auto& strategy : strat_it->second) {
            for (std::size_t f = 0; f < fees.size(); ++f) {
                MetricsReport r;
                r.model = model;
                r.task = task_name;
                r.strategy = strategy;
                r.fee = fees[f];
                r.year = year;
                r.split_count = list.size();
                for (const auto& m : metric_names()) r.set(m, nan);
                if (skipped) {
                    r.status = "skipped";
                    r.error = "model does not support this task";
                    out.reports.push_back(r);
                    continue;
                }
                if (failed) {
                    r.status = "failed";
                    r.error = "tau " + std::to_string(failed->tau) + ": " + failed->error;
                    out.reports.push_back(r);
                    continue;
                }
                std::vector<const EquityCurve*> parts;
                for (const auto* c : list) {
                    const auto sf = c->result->strategy_failures.find(strategy);
                    if (sf != c->result->strategy_failures.end()) {
                        r.status = "failed";
                        r.error = "tau " + std::to_string(c->tau) + ": " + sf->second;
                        break;
                    }
                    parts.push_back(&c->result->curves.at(strategy).at(f));
                }
                if (r.status == "ok") {
                    const auto err = error_metrics(actual, predicted);
                    const auto rank = rank_metrics(actual, signal);
                    const auto curve = chain(parts);
                    const auto path = curve.path();
                    const auto trade = trading_metrics(path);
                    const auto risk = risk_metrics(path);
                    r.mse = err.mse;
                    r.mae = err.mae;
                    r.ic = rank.ic;
                    r.ir = rank.ir;
                    r.degenerate_hours = rank.degenerate_hours;
                    r.cagr = trade.cagr;
                    r.sharpe = trade.sharpe;
                    r.mdd = risk.mdd;
                    r.var95 = risk.var95;
                    r.es95 = risk.es95;
                    out.equity[{task_name, model, strategy, fees[f], year}] = curve;
                }
                out.reports.push_back(r);
            }
        }
    }
    return out;
}

std::map<std::pair<std::string, std::string>, RankTable> rank_by_group(const std::vector<MetricsReport>& reports,
                                                                       const std::vector<std::string>& metrics) {
    std::map<std::pair<std::string, std::string>, std::vector<MetricsReport>> groups;
    for (const auto& r : reports) {
        if (r.status != "skipped") groups[{r.task, r.year}].push_back(r);
    }
    std::map<std::pair<std::string, std::string>, RankTable> out;
    for (const auto& [key, list] : groups) {
        std::set<std::string> models;
        for (const auto& r : list) models.insert(r.model);
        if (models.size() < 2) continue;
        out.emplace(key, rank_models(list, metrics));
    }
    return out;
}

RunSummary run(const BenchConfig& config) {
    config.validate();
    LoadOptions load;
    if (config.start) load.start = parse_timestamp(*config.start);
    if (config.end) load.end = parse_timestamp(*config.end);
    const auto prices = load_ohlc(config.data, load);
    const auto returns = log_returns(prices);
    const auto features = config.features.empty() ? feature_catalog() : select_features(config.features);
    const fs::path out_dir = config.output_dir;
    const fs::path work_dir = out_dir / "bridge";

    struct Unit {
        TaskKind task;
        std::size_t tau;
        std::size_t model;
    };
    std::vector<Unit> units;
    std::map<TaskKind, SplitPlan> plans;
    for (auto task : config.tasks) {
        plans[task] = make_splits(returns.l(), config.window, config.test_length(task));
        for (auto tau : plans[task].offsets) {
            for (std::size_t m = 0; m < config.models.size(); ++m) units.push_back({task, tau, m});
        }
    }

    std::vector<CellOutcome> cells(units.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < units.size(); k = next++) {
            const auto& u = units[k];
            const auto& spec = config.models[u.model];
            auto& cell = cells[k];
            cell.task = u.task;
            cell.tau = u.tau;
            cell.model = spec.id;
            const auto slices = split_slices(returns, u.tau, config.window, config.test_length(u.task));
            cell.year = std::to_string(utc_year(slices.test.timestamps.front()));
            const Split split{u.tau, slices.train, slices.test};
            try {
                auto model = spec.instantiate(work_dir);
                const std::uint64_t seed = derive_seed(config.seed, salt_for(u.tau, spec.id));
                if (u.task == TaskKind::PredictiveUtility) {
                    PredictiveUtilityConfig pc;
                    pc.forecaster = config.forecaster;
                    pc.forecaster.seed = derive_seed(seed, 1);
                    pc.strategies = config.strategies;
                    pc.fees = config.fees;
                    pc.seed = seed;
                    pc.features = features;
                    cell.result = run_predictive_utility(split, *model, pc);
                } else {
                    StatArbConfig sc;
                    sc.gamma = config.gamma;
                    sc.fees = config.fees;
                    cell.result = run_stat_arb(split, *model, sc);
                }
            } catch (const Error& e) {
                cell.status = e.code() == ErrorCode::ModeUnsupported ? "skipped" : "failed";
                cell.error = e.what();
            } catch (const std::exception& e) {
                cell.status = "failed";
                cell.error = e.what();
            }
        }
    };
    const std::size_t threads = std::min(config.jobs, std::max<std::size_t>(units.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    RunSummary summary;
    summary.cells = cells.size();
    for (const auto& c : cells) {
        const std::string where = to_string(c.task) + " tau=" + std::to_string(c.tau) + " " + c.model;
        if (c.status == "failed") {
            ++summary.failed;
            summary.failures.push_back(where + ": " + c.error);
        } else if (c.status == "skipped") {
            ++summary.skipped;
        } else {
            for (const auto& [strategy, message] : c.result->strategy_failures) {
                ++summary.failed;
                summary.failures.push_back(where + "/" + strategy + ": " + message);
            }
        }
    }

    std::map<TaskKind, std::vector<std::string>> strategies{{TaskKind::PredictiveUtility, config.strategies},
                                                            {TaskKind::StatArb, {kMeanReversionStrategy}}};
    const auto agg = aggregate_yearly(cells, strategies, config.fees);

    fs::create_directories(out_dir);
    std::vector<std::string> artifacts;
    for (const auto& r : agg.reports) {
        const std::string rel = "metrics/" + cell_stem(r.task, r.model, r.strategy, r.fee, r.year) + ".json";
        write_text(out_dir / rel, report_json(r));
        artifacts.push_back(rel);
    }
    write_text(out_dir / "metrics/all.csv", reports_csv(agg.reports));
    artifacts.push_back("metrics/all.csv");

    std::map<std::tuple<std::string, std::string, std::string>, std::vector<std::pair<std::string, const EquityCurve*>>> plots;
    for (const auto& [key, curve] : agg.equity) {
        const auto& [task, model, strategy, fee, year] = key;
        const std::string rel = "equity/" + cell_stem(task, model, strategy, fee, year) + ".csv";
        write_text(out_dir / rel, equity_csv(curve));
        artifacts.push_back(rel);
        plots[{task, model, year}].emplace_back(strategy + " fee " + format_number(fee), &curve);
    }
    for (const auto& [key, curves] : plots) {
        const auto& [task, model, year] = key;
        const std::string rel = "equity/" + task + "__" + sanitize(model) + "__" + year + ".svg";
        write_text(out_dir / rel, equity_svg(curves, task + " / " + model + " / " + year));
        artifacts.push_back(rel);
    }
    for (auto& rel : write_ranks(out_dir, agg.reports)) artifacts.push_back(std::move(rel));

    ojson timings;
    timings["note"] = "wall-clock seconds; excluded from the determinism contract";
    ojson groups = ojson::array();
    std::vector<MetricsReport> timing_reports;
    for (const auto& [key, t] : agg.timings) {
        const auto& [task, model, year] = key;
        groups.push_back({{"task", task}, {"model", model}, {"year", year}, {"train_time_s", t.train_time_s},
                          {"infer_time_s", t.infer_time_s}});
        MetricsReport r;
        r.task = task;
        r.model = model;
        r.year = year;
        r.strategy = "-";
        r.train_time_s = t.train_time_s;
        r.infer_time_s = t.infer_time_s;
        timing_reports.push_back(r);
    }
    timings["groups"] = groups;
    ojson ranks = ojson::array();
    for (const auto& [key, table] : rank_by_group(timing_reports, timing_metric_names())) {
        for (const auto& metric : table.metrics) {
            for (const auto& [model, entry] : table.ranks.at(metric)) {
                ranks.push_back({{"task", key.first}, {"year", key.second}, {"metric", metric}, {"model", model},
                                 {"mean_value", entry.mean_value}, {"rank", entry.rank}});
            }
        }
    }
    timings["ranks"] = ranks;
    write_text(out_dir / "timings.json", timings.dump(2) + "\n");

    ojson manifest;
    manifest["version"] = kVersion;
    manifest["config_hash"] = config_hash(config);
    manifest["config"] = ojson::parse(config_json(config, true));
    manifest["assets"] = returns.assets;
    ojson dropped = ojson::array();
    for (const auto& d : prices.dropped) dropped.push_back({{"asset", d.asset}, {"reason", d.reason}});
    manifest["dropped_assets"] = dropped;
    ojson splits;
    for (const auto& [task, plan] : plans) {
        ojson list = ojson::array();
        for (auto tau : plan.offsets) {
            const auto ts = returns.timestamps[tau];
            list.push_back({{"tau", tau}, {"test_start", format_timestamp(ts)}, {"year", std::to_string(utc_year(ts))}});
        }
        splits[to_string(task)] = list;
    }
    manifest["splits"] = splits;
    manifest["cells"] = {{"total", summary.cells}, {"failed", summary.failed}, {"skipped", summary.skipped}};
    manifest["failures"] = summary.failures;
    ojson excluded = ojson::array();
    for (const auto& c : cells) {
        if (!c.result) continue;
        for (const auto& e : c.result->excluded) {
            excluded.push_back({{"task", to_string(c.task)}, {"tau", c.tau}, {"model", c.model}, {"asset", e.asset},
                                {"reason", e.reason}});
        }
    }
    manifest["excluded_assets"] = excluded;
    artifacts.push_back("timings.json");
    std::sort(artifacts.begin(), artifacts.end());
    manifest["artifacts"] = artifacts;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

std::size_t rerank(const fs::path& dir) {
    const auto reports = load_reports(dir);
    return write_ranks(dir, reports).size();
}

std::string stats_report(const fs::path& data) {
    const auto prices = load_ohlc(data);
    const auto returns = log_returns(prices);
    const auto stats = descriptive_stats(returns);
    ojson j;
    j["assets"] = returns.assets;
    j["hours"] = returns.l();
    j["start"] = format_timestamp(returns.timestamps.front());
    j["end"] = format_timestamp(returns.timestamps.back());
    ojson per_asset;
    for (const auto& [asset, s] : stats.per_asset) per_asset[asset] = {{"mean_pct", s.mean_pct}, {"vol_pct", s.vol_pct}};
    j["per_asset"] = per_asset;
    ojson hours = ojson::array();
    for (std::size_t h = 0; h < 24; ++h) {
        const auto& b = stats.by_hour[h];
        hours.push_back({{"hour", h}, {"mean_pct", b.mean_pct}, {"vol_pct", b.vol_pct}, {"samples", b.samples}});
    }
    j["by_hour"] = hours;
    ojson dropped = ojson::array();
    for (const auto& d : prices.dropped) dropped.push_back({{"asset", d.asset}, {"reason", d.reason}});
    j["dropped_assets"] = dropped;
    return j.dump(2) + "\n";
}

}  // namespace ctbench
