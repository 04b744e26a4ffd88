// ctxchain command line: suites, single runs, and the property battery.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ctxchain/selfcheck.hpp"
#include "ctxchain/suite.hpp"

using namespace ctxchain;

namespace {

int cmd_run(const std::string& suite_name, std::size_t seeds, std::uint64_t base_seed, std::string out_dir,
            int parallel, const std::vector<std::string>& settings, bool timing) {
    SuiteSpec suite = make_suite(suite_name, seeds, base_seed);
    for (const auto& kv : settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + kv + "\"");
        for (auto& cfg : suite.conditions) apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (const char* env = std::getenv("CTXCHAIN_OUT"); env != nullptr && *env != '\0') out_dir = env;

    const auto results = parallel == 1 ? run_suite_serial(suite) : run_suite(suite, parallel);
    const CsvOptions opts{timing};
    write_suite(suite, results, out_dir, opts);
    std::fputs(summary_csv(results, opts).c_str(), stdout);
    for (const auto& r : results) {
        if (!r.poc.empty()) std::fputs(poc_summary_csv(r).c_str(), stdout);
        for (const auto& f : r.failures)
            fmt::print(stderr, "{}: seed {} failed: {}\n", condition_file_stem(r.cfg), f.seed, f.message);
    }
    fmt::print(stderr, "wrote {}/{}\n", out_dir, suite.name);
    return 0;
}

int cmd_single(const std::string& path, std::uint64_t seed) {
    const ScenarioConfig cfg = load_config(path);
    const RunResult r = run_one(cfg, seed);
    const RunSummary& s = r.summary;
    fmt::print("seed={} success_end={} recovery_s={} pairs_used={} blocks_transferred={} bytes_est={} "
               "max_forktop={} reorgs={} runtime_ms={:.3f}\n",
               s.seed, s.success_end ? 1 : 0, s.recovery_s ? fmt::format("{:.3f}", *s.recovery_s) : "NA",
               s.pairs_used, s.blocks_transferred, s.bytes_est, s.max_forktop_seen, s.reorg_count, s.runtime_ms);
    for (const auto& p : r.poc)
        fmt::print("poc budget={} challenge_success={:.4f} stored_peak={} required_peak={}\n", p.budget,
                   p.challenge_success_mean, p.stored_peak, p.required_peak);
    return 0;
}

int cmd_check(std::uint64_t seed, std::size_t cases) {
    bool ok = true;
    for (const auto& c : run_selfcheck(seed, cases)) {
        fmt::print("{} {} ({} cases){}{}\n", c.passed ? "PASS" : "FAIL", c.name, c.cases,
                   c.detail.empty() ? "" : ": ", c.detail);
        ok = ok && c.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ctxchain: deterministic ledger partition-recovery simulator"};
    app.require_subcommand(1);

    std::string suite_name;
    std::size_t seeds = 500;
    std::uint64_t base_seed = 0;
    std::string out_dir = "out";
    int parallel = 0;
    std::vector<std::string> settings;
    bool no_timing = false;
    auto* run = app.add_subcommand("run", "run an experiment suite and write CSVs");
    run->add_option("--suite", suite_name, "suite name (see list-suites)")->required();
    run->add_option("--seeds", seeds, "seeds per condition")->check(CLI::PositiveNumber);
    run->add_option("--base-seed", base_seed, "first seed");
    run->add_option("--out", out_dir, "output directory (CTXCHAIN_OUT overrides)");
    run->add_option("--parallel", parallel, "worker threads; 1 = serial reference, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--set", settings, "key=value override applied to every condition");
    run->add_flag("--no-timing", no_timing, "write runtime columns as 0 for byte-stable output");

    std::string config_path;
    std::uint64_t seed = 0;
    auto* single = app.add_subcommand("single", "run one configuration for one seed");
    single->add_option("--config", config_path, "key=value configuration file")->required();
    single->add_option("--seed", seed, "seed")->required();

    auto* list = app.add_subcommand("list-suites", "print the available suite names");

    std::uint64_t check_seed = 2024;
    std::size_t check_cases = 200;
    auto* check = app.add_subcommand("check", "run the invariant/property battery");
    check->add_option("--seed", check_seed, "generator seed");
    check->add_option("--cases", check_cases, "generated cases per property")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(suite_name, seeds, base_seed, out_dir, parallel, settings, !no_timing);
        if (*single) return cmd_single(config_path, seed);
        if (*list) {
            for (const auto& n : suite_names()) fmt::print("{}\n", n);
            return 0;
        }
        if (*check) return cmd_check(check_seed, check_cases);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: {}\n\n", e.what());
        std::cerr << app.help();
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
