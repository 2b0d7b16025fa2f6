// Command-line entry points: validate scenario files, run them to their
// horizon with trace/metrics export, and list the shipped scenarios.
//
// Exit codes: 0 clean run, 1 infeasible report or unresolved violation,
// 2 configuration or I/O error.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cresim/scenario.hpp"
#include "cresim/simulation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutDirEnv = "CRESIM_OUT_DIR";
constexpr const char* kScenarioDirEnv = "CRESIM_SCENARIO_DIR";

#ifndef CRESIM_DEFAULT_SCENARIO_DIR
#define CRESIM_DEFAULT_SCENARIO_DIR "scenarios"
#endif

std::string out_dir() {
    if (const char* d = std::getenv(kOutDirEnv)) return d;
    return ".";
}

std::string scenario_dir() {
    if (const char* d = std::getenv(kScenarioDirEnv)) return d;
    return CRESIM_DEFAULT_SCENARIO_DIR;
}

struct RunOptions {
    std::string trace_path;
    std::string metrics_path;
    std::optional<std::uint64_t> seed;
    std::string until;
};

int run_one(const std::string& file, const RunOptions& opt, std::mutex& io) {
    cresim::ScenarioConfig cfg;
    try {
        cfg = cresim::parse_scenario(file);
    } catch (const cresim::ScenarioError& e) {
        std::lock_guard<std::mutex> lk(io);
        for (const auto& err : e.errors) std::cerr << "error: " << err << "\n";
        return 2;
    }
    if (opt.seed) cfg.seed = *opt.seed;

    cresim::SimTime horizon = cfg.horizon;
    if (!opt.until.empty()) {
        try {
            horizon = cresim::parse_duration(opt.until);
        } catch (const cresim::DurationParseError& e) {
            std::lock_guard<std::mutex> lk(io);
            std::cerr << "error: --until: " << e.what() << "\n";
            return 2;
        }
    }

    cresim::Simulation sim(cfg);
    cresim::RunSummary summary = sim.run_until(horizon);

    std::string trace_path = opt.trace_path.empty()
                                 ? (fs::path(out_dir()) / (cfg.name + ".trace.jsonl")).string()
                                 : opt.trace_path;
    std::string metrics_path = opt.metrics_path.empty()
                                   ? (fs::path(out_dir()) / (cfg.name + ".metrics.csv")).string()
                                   : opt.metrics_path;
    try {
        cresim::export_trace(sim.trace(), trace_path);
        cresim::export_metrics(sim.metrics(), metrics_path);
    } catch (const cresim::IoFailure& e) {
        std::lock_guard<std::mutex> lk(io);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    std::lock_guard<std::mutex> lk(io);
    std::cout << cfg.name << ": " << summary.violations.size() << " violation(s), "
              << summary.reconfigurations.size() << " reconfiguration(s), "
              << summary.infeasible_reports.size() << " infeasible report(s)\n";
    for (const auto& r : summary.infeasible_reports) std::cout << "  " << r << "\n";
    std::cout << "  trace: " << trace_path << "\n  metrics: " << metrics_path << "\n";
    return summary.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contract-based resiliency simulator"};
    app.require_subcommand(1);

    std::string validate_file;
    CLI::App* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
    validate->add_option("file", validate_file, "scenario file")->required();

    std::vector<std::string> run_files;
    RunOptions opt;
    std::uint64_t seed_arg = 0;
    int jobs = 1;
    CLI::App* run = app.add_subcommand("run", "Run scenario file(s) to the horizon");
    run->add_option("files", run_files, "scenario file(s)")->required();
    run->add_option("--trace", opt.trace_path, "trace output path (single file only)");
    run->add_option("--metrics", opt.metrics_path, "metrics output path (single file only)");
    CLI::Option* seed_opt = run->add_option("--seed", seed_arg, "override the scenario seed");
    run->add_option("--until", opt.until, "override the run horizon, e.g. 10s");
    run->add_option("--jobs", jobs, "run files in parallel")->check(CLI::PositiveNumber);

    CLI::App* list = app.add_subcommand("list-scenarios", "List shipped scenario files");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        try {
            cresim::ScenarioConfig cfg = cresim::parse_scenario(validate_file);
            std::cout << "ok: " << cfg.name << "\n";
            return 0;
        } catch (const cresim::ScenarioError& e) {
            for (const auto& err : e.errors) std::cerr << "error: " << err << "\n";
            return 2;
        }
    }

    if (list->parsed()) {
        fs::path dir = scenario_dir();
        std::error_code ec;
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(dir, ec)) {
            if (entry.path().extension() == ".json")
                names.push_back(entry.path().filename().string());
        }
        if (ec) {
            std::cerr << "error: cannot read scenario directory " << dir << "\n";
            return 2;
        }
        std::sort(names.begin(), names.end());
        for (const auto& n : names) std::cout << n << "\n";
        return 0;
    }

    if (seed_opt->count() > 0) opt.seed = seed_arg;
    if (run_files.size() > 1 && (!opt.trace_path.empty() || !opt.metrics_path.empty())) {
        std::cerr << "error: --trace/--metrics require a single scenario file\n";
        return 2;
    }

    std::mutex io;
    std::atomic<int> worst{0};
    if (jobs <= 1 || run_files.size() <= 1) {
        for (const auto& f : run_files) {
            int rc = run_one(f, opt, io);
            if (rc > worst.load()) worst.store(rc);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        int n = std::min<std::size_t>(jobs, run_files.size());
        for (int i = 0; i < n; ++i) {
            pool.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < run_files.size();
                     k = next.fetch_add(1)) {
                    int rc = run_one(run_files[k], opt, io);
                    int cur = worst.load();
                    while (rc > cur && !worst.compare_exchange_weak(cur, rc)) {
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return worst.load();
}
