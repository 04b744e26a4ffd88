// Experiment suites, seed orchestration and CSV emission.
//
// run_suite_serial is the reference implementation; run_suite spreads the
// (condition, seed) grid over OpenMP threads. Each run writes only its own
// result slot and aggregation is order-insensitive, so both produce identical
// output for any thread count.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctxchain/metrics.hpp"
#include "ctxchain/poc.hpp"
#include "ctxchain/scenario.hpp"
#include "ctxchain/simulation.hpp"

namespace ctxchain {

struct SuiteSpec {
    std::string name;
    std::vector<ScenarioConfig> conditions;
};

const std::vector<std::string>& suite_names();

// Builds a named suite; seeds and base_seed apply to every condition. Throws
// ConfigError for an unknown name.
SuiteSpec make_suite(const std::string& name, std::size_t seeds, std::uint64_t base_seed = 0);

struct SeedFailure {
    std::uint64_t seed = 0;
    std::string message;
};

struct ConditionResult {
    ScenarioConfig cfg;
    std::vector<RunResult> runs;  // completed runs in seed order
    std::vector<SeedFailure> failures;
    AggregateStats stats;
    std::vector<PocAggregate> poc;  // one per budget when cfg.poc is set

    std::string variant_name() const { return cfg.variant.name(); }
};

ConditionResult finish_condition(const ScenarioConfig& cfg, std::vector<RunResult> runs,
                                 std::vector<SeedFailure> failures);

std::vector<ConditionResult> run_suite_serial(const SuiteSpec& suite);
std::vector<ConditionResult> run_suite(const SuiteSpec& suite, int parallelism);

// Runs a single condition over its seed range.
ConditionResult run_condition(const ScenarioConfig& cfg, int parallelism = 1);

struct CsvOptions {
    // When false, runtime columns are written as 0 so output is byte-stable.
    bool timing = true;
};

std::string condition_file_stem(const ScenarioConfig& cfg);
std::string summary_csv(const std::vector<ConditionResult>& results, const CsvOptions& opts = {});
std::string poc_summary_csv(const ConditionResult& result);

// Writes out_dir/<suite>/<condition>.csv and out_dir/<suite>/summary.csv (and
// poc.csv for conditions with a proof-of-context observer).
void write_suite(const SuiteSpec& suite, const std::vector<ConditionResult>& results,
                 const std::filesystem::path& out_dir, const CsvOptions& opts = {});

}  // namespace ctxchain
