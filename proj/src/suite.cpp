#include "ctxchain/suite.hpp"

#include <fstream>
#include <utility>

#include <omp.h>

namespace ctxchain {

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"main", "ratio", "scaling", "longtime", "n50_budget", "poc"};
    return names;
}

namespace {

struct Case {
    const char* label;
    const char* ratio;
};

constexpr Case kCaseA{"CaseA_50_50", "50/50"};
constexpr Case kCaseB{"CaseB_80_20", "80/20"};
constexpr Case kCaseC{"CaseC_90_10", "90/10"};

const std::vector<SyncVariant::Kind> kVariants{SyncVariant::Kind::NoQ, SyncVariant::Kind::Q_only,
                                               SyncVariant::Kind::Gossip_only, SyncVariant::Kind::Both};

ScenarioConfig base_condition(const Case& c, Regime regime, SyncVariant variant, std::size_t seeds,
                              std::uint64_t base_seed) {
    ScenarioConfig cfg;
    cfg.scenario = c.label;
    cfg.set_regime(regime);
    cfg.partition.ratio = c.ratio;
    cfg.variant = variant;
    cfg.seeds = seeds;
    cfg.base_seed = base_seed;
    return cfg;
}

}  // namespace

SuiteSpec make_suite(const std::string& name, std::size_t seeds, std::uint64_t base_seed) {
    SuiteSpec suite{name, {}};
    auto& out = suite.conditions;
    if (name == "main") {
        for (const Case& c : {kCaseA, kCaseB})
            for (Regime r : {Regime::clean, Regime::noisy})
                for (auto k : kVariants) out.push_back(base_condition(c, r, SyncVariant::make(k), seeds, base_seed));
    } else if (name == "ratio") {
        for (const Case& c : {kCaseA, kCaseB, kCaseC})
            for (auto k : kVariants)
                out.push_back(base_condition(c, Regime::noisy, SyncVariant::make(k), seeds, base_seed));
    } else if (name == "scaling") {
        for (std::size_t n : {20, 50, 100})
            for (auto k : kVariants) {
                auto cfg = base_condition(kCaseA, Regime::noisy, SyncVariant::make(k), seeds, base_seed);
                cfg.n_nodes = n;
                cfg.scenario += "_N" + std::to_string(n);
                out.push_back(cfg);
            }
    } else if (name == "longtime") {
        for (const Case& c : {kCaseA, kCaseB})
            for (auto k : kVariants) {
                auto cfg = base_condition(c, Regime::noisy, SyncVariant::make(k), seeds, base_seed);
                cfg.sim_time = 5400.0;
                cfg.scenario += "_T5400";
                out.push_back(cfg);
            }
    } else if (name == "n50_budget") {
        std::vector<SyncVariant> grid{SyncVariant::make(SyncVariant::Kind::NoQ, 1, 1),
                                      SyncVariant::make(SyncVariant::Kind::Q_only, 1, 1)};
        for (std::uint32_t b : {4u, 8u, 12u, 16u}) grid.push_back(SyncVariant::make(SyncVariant::Kind::Gossip_only, b, b));
        for (std::uint32_t b : {4u, 8u, 12u, 16u}) grid.push_back(SyncVariant::make(SyncVariant::Kind::Both, 1, b));
        for (const Case& c : {kCaseA, kCaseB})
            for (const auto& v : grid) {
                auto cfg = base_condition(c, Regime::noisy, v, seeds, base_seed);
                cfg.n_nodes = 50;
                cfg.scenario += "_N50";
                out.push_back(cfg);
            }
    } else if (name == "poc") {
        auto cfg = base_condition(kCaseA, Regime::noisy, SyncVariant::make(SyncVariant::Kind::Both), seeds, base_seed);
        cfg.poc.emplace();
        out.push_back(cfg);
    } else {
        throw ConfigError("unknown suite \"" + name + "\"");
    }
    return suite;
}

ConditionResult finish_condition(const ScenarioConfig& cfg, std::vector<RunResult> runs,
                                 std::vector<SeedFailure> failures) {
    ConditionResult r;
    r.cfg = cfg;
    r.runs = std::move(runs);
    r.failures = std::move(failures);
    if (!r.runs.empty()) {
        SummaryAccumulator acc;
        for (const auto& run : r.runs) acc.add(run.summary);
        r.stats = acc.finish();
    }
    if (cfg.poc && !r.runs.empty()) {
        for (std::size_t b = 0; b < cfg.poc->budgets.size(); ++b) {
            std::vector<PocSummary> per_budget;
            per_budget.reserve(r.runs.size());
            for (const auto& run : r.runs) per_budget.push_back(run.poc.at(b));
            r.poc.push_back(aggregate_poc(per_budget));
        }
    }
    return r;
}

namespace {

struct Slot {
    std::optional<RunResult> result;
    SeedFailure failure;
};

Slot run_slot(const ScenarioConfig& cfg, std::uint64_t seed) {
    Slot s;
    try {
        s.result = run_one(cfg, seed);
    } catch (const RunFailure& e) {
        s.failure = {seed, e.what()};
    }
    return s;
}

std::vector<ConditionResult> collect(const SuiteSpec& suite, std::vector<Slot>& slots) {
    std::vector<ConditionResult> out;
    std::size_t offset = 0;
    for (const auto& cfg : suite.conditions) {
        std::vector<RunResult> runs;
        std::vector<SeedFailure> failures;
        for (std::size_t i = 0; i < cfg.seeds; ++i) {
            Slot& s = slots[offset + i];
            if (s.result) runs.push_back(std::move(*s.result));
            else failures.push_back(std::move(s.failure));
        }
        offset += cfg.seeds;
        out.push_back(finish_condition(cfg, std::move(runs), std::move(failures)));
    }
    return out;
}

}  // namespace

std::vector<ConditionResult> run_suite_serial(const SuiteSpec& suite) {
    for (const auto& cfg : suite.conditions) cfg.validate();
    std::vector<Slot> slots;
    for (const auto& cfg : suite.conditions)
        for (std::size_t i = 0; i < cfg.seeds; ++i) slots.push_back(run_slot(cfg, cfg.base_seed + i));
    return collect(suite, slots);
}

std::vector<ConditionResult> run_suite(const SuiteSpec& suite, int parallelism) {
    for (const auto& cfg : suite.conditions) cfg.validate();
    std::vector<std::pair<const ScenarioConfig*, std::uint64_t>> tasks;
    for (const auto& cfg : suite.conditions)
        for (std::size_t i = 0; i < cfg.seeds; ++i) tasks.emplace_back(&cfg, cfg.base_seed + i);

    std::vector<Slot> slots(tasks.size());
    const auto n = static_cast<std::int64_t>(tasks.size());
    const int threads = parallelism > 0 ? parallelism : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (std::int64_t t = 0; t < n; ++t) {
        slots[static_cast<std::size_t>(t)] = run_slot(*tasks[static_cast<std::size_t>(t)].first,
                                                      tasks[static_cast<std::size_t>(t)].second);
    }
    return collect(suite, slots);
}

ConditionResult run_condition(const ScenarioConfig& cfg, int parallelism) {
    SuiteSpec one{"single", {cfg}};
    auto results = parallelism == 1 ? run_suite_serial(one) : run_suite(one, parallelism);
    return std::move(results.front());
}

std::string condition_file_stem(const ScenarioConfig& cfg) {
    return cfg.scenario + "_" + regime_name(cfg.regime) + "_" + cfg.variant.name();
}

std::string summary_csv(const std::vector<ConditionResult>& results, const CsvOptions& opts) {
    std::string out = aggregate_csv_header() + "\n";
    for (const auto& r : results) {
        AggregateStats stats = r.stats;
        if (!opts.timing) stats.runtime_mean_ms = 0.0;
        out += aggregate_csv_row(r.cfg.scenario + "_" + regime_name(r.cfg.regime), r.variant_name(), stats,
                                 r.cfg.base_seed, r.failures.size()) +
               "\n";
    }
    return out;
}

std::string poc_summary_csv(const ConditionResult& result) {
    std::string out = poc_csv_header() + "\n";
    for (const auto& a : result.poc) out += poc_csv_row(a) + "\n";
    return out;
}

void write_suite(const SuiteSpec& suite, const std::vector<ConditionResult>& results,
                 const std::filesystem::path& out_dir, const CsvOptions& opts) {
    const auto dir = out_dir / suite.name;
    std::filesystem::create_directories(dir);
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << text;
    };
    for (const auto& r : results) {
        std::string rows = run_csv_header() + "\n";
        for (const auto& run : r.runs) {
            RunSummary s = run.summary;
            if (!opts.timing) s.runtime_ms = 0.0;
            rows += run_csv_row(s) + "\n";
        }
        write(dir / (condition_file_stem(r.cfg) + ".csv"), rows);
        if (r.cfg.poc) write(dir / (condition_file_stem(r.cfg) + "_poc.csv"), poc_summary_csv(r));
    }
    write(dir / "summary.csv", summary_csv(results, opts));
}

}  // namespace ctxchain
