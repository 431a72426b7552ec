#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ctbench/bench.hpp"
#include "ctbench/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ctbench: walk-forward benchmark for time-series generation models on crypto returns"};
    app.set_version_flag("--version", std::string(ctbench::kVersion));
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run every configured (split, model, task) cell");
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> jobs;
    std::optional<std::uint64_t> seed;
    run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
    run_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", seed, "Base seed (overrides the config)");

    auto* stats_cmd = app.add_subcommand("stats", "Descriptive statistics of a candle directory");
    std::string data_dir;
    stats_cmd->add_option("--data", data_dir, "Directory of <ASSET>.csv files")->required();

    auto* rank_cmd = app.add_subcommand("rank", "Rebuild rank tables from a run's metrics");
    std::string in_dir;
    rank_cmd->add_option("--in", in_dir, "Output directory of a previous run")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto config = ctbench::parse_config(config_path);
            if (out_dir) config.output_dir = *out_dir;
            if (jobs) config.jobs = *jobs;
            if (seed) config.seed = *seed;
            const auto summary = ctbench::run(config);
            std::cout << "cells: " << summary.cells << ", failed: " << summary.failed << ", skipped: " << summary.skipped
                      << "\noutput: " << config.output_dir.string() << "\n";
            for (const auto& f : summary.failures) std::cerr << "failed: " << f << "\n";
            return summary.all_succeeded() ? 0 : 1;
        }
        if (*stats_cmd) {
            std::cout << ctbench::stats_report(data_dir);
            return 0;
        }
        if (*rank_cmd) {
            const auto written = ctbench::rerank(in_dir);
            std::cout << "rank tables written: " << written << "\n";
            return 0;
        }
    } catch (const ctbench::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
