// Acceptance run: every criterion over the full seed budget, one PASS/FAIL
// line each. Exit status is the number of failing criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ctxchain/selfcheck.hpp"
#include "ctxchain/suite.hpp"

using namespace ctxchain;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(fmt::format("{}{}", ok ? "" : "!", what));
    }
};

class Grid {
public:
    void add(const std::string& tag, ScenarioConfig cfg) {
        cfg.scenario = tag;
        tags_.push_back(tag);
        suite_.conditions.push_back(std::move(cfg));
    }

    void run(int parallel) {
        suite_.name = "acceptance";
        auto results = run_suite(suite_, parallel);
        for (std::size_t i = 0; i < results.size(); ++i) results_.emplace(tags_[i], std::move(results[i]));
    }

    const ConditionResult& at(const std::string& tag) const { return results_.at(tag); }
    const AggregateStats& stats(const std::string& tag) const { return at(tag).stats; }
    const std::vector<std::string>& tags() const { return tags_; }

private:
    SuiteSpec suite_;
    std::vector<std::string> tags_;
    std::map<std::string, ConditionResult> results_;
};

const std::vector<std::string> kVariants{"NoQ", "Q_only", "Gossip_only", "Both"};

std::string tag(const std::string& group, const std::string& cs, const std::string& variant) {
    return group + "/" + cs + "/" + variant;
}

ScenarioConfig base(const std::string& ratio, Regime regime, const std::string& variant, std::size_t seeds) {
    ScenarioConfig cfg;
    cfg.set_regime(regime);
    cfg.partition.ratio = ratio;
    cfg.variant = SyncVariant::parse(variant);
    cfg.seeds = seeds;
    return cfg;
}

double p95(const AggregateStats& s) { return s.recovery_p95_s.value_or(NAN); }
double mean_rec(const AggregateStats& s) { return s.recovery_mean_s.value_or(NAN); }

// Criterion-1 thresholds for one case prefix.
void separation(Verdict& v, const Grid& g, const std::string& group, const std::string& cs) {
    const auto& noq = g.stats(tag(group, cs, "NoQ"));
    const auto& qo = g.stats(tag(group, cs, "Q_only"));
    const auto& go = g.stats(tag(group, cs, "Gossip_only"));
    const auto& both = g.stats(tag(group, cs, "Both"));
    v.require(go.success_rate - noq.success_rate >= 0.10,
              fmt::format("{} {} Gossip_only-NoQ {:.3f}", group, cs, go.success_rate - noq.success_rate));
    v.require(both.success_rate - qo.success_rate >= 0.10,
              fmt::format("{} {} Both-Q_only {:.3f}", group, cs, both.success_rate - qo.success_rate));
    v.require(p95(go) <= 0.7 * p95(noq), fmt::format("{} {} p95 ratio {:.3f}", group, cs, p95(go) / p95(noq)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ctxchain acceptance criteria"};
    std::size_t seeds = 500;
    int parallel = 0;
    app.add_option("--seeds", seeds, "seeds per condition")->check(CLI::PositiveNumber);
    app.add_option("--parallel", parallel, "worker threads, 0 = all cores");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::string>> cases{{"A", "50/50"}, {"B", "80/20"}};
    Grid g;
    for (const auto& [cs, ratio] : cases)
        for (Regime r : {Regime::clean, Regime::noisy})
            for (const auto& v : kVariants) g.add(tag(regime_name(r), cs, v), base(ratio, r, v, seeds));
    for (const auto& v : kVariants) g.add(tag("noisy", "C", v), base("90/10", Regime::noisy, v, seeds));
    for (std::size_t n : {50, 100})
        for (const auto& v : kVariants) {
            auto cfg = base("50/50", Regime::noisy, v, seeds);
            cfg.n_nodes = n;
            g.add(tag(fmt::format("N{}", n), "A", v), cfg);
        }
    for (const auto& [cs, ratio] : cases)
        for (const char* v : {"Both_1_16", "Gossip_only_16_16"}) {
            auto cfg = base(ratio, Regime::noisy, v, seeds);
            cfg.n_nodes = 50;
            g.add(tag("N50", cs, v), cfg);
        }
    for (const auto& [cs, ratio] : cases)
        for (const auto& v : kVariants) {
            auto cfg = base(ratio, Regime::noisy, v, seeds);
            cfg.sim_time = 5400.0;
            g.add(tag("T5400", cs, v), cfg);
            auto tm = base(ratio, Regime::noisy, v, seeds);
            tm.protocol.cp_mode = CheckpointMode::time;
            g.add(tag("cptime", cs, v), tm);
        }
    {
        auto cfg = base("50/50", Regime::noisy, "Both", seeds);
        cfg.poc.emplace();
        g.add("poc/A/Both", cfg);
    }

    fmt::print("running {} conditions x {} seeds\n", g.tags().size(), seeds);
    std::fflush(stdout);
    g.run(parallel);

    fmt::print("{:<28} {:>7} {:>9} {:>9} {:>10} {:>6}\n", "condition", "success", "rec_mean", "rec_p95", "pairs",
               "failed");
    for (const auto& t : g.tags()) {
        const auto& r = g.at(t);
        fmt::print("{:<28} {:>7.3f} {:>9.2f} {:>9.2f} {:>10.1f} {:>6}\n", t, r.stats.success_rate,
                   mean_rec(r.stats), p95(r.stats), r.stats.gossip_pairs_mean, r.failures.size());
    }
    for (const auto& a : g.at("poc/A/Both").poc)
        fmt::print("poc B={:<2} challenge {:.3f} rejoin {:.3f} stored {:.2f} MiB required {:.2f} MiB ratio {:.2f} "
                   "peak_ctx {:.2f} rejoin_ctx {:.2f}\n",
                   a.budget, a.challenge_success_mean, a.rejoin_success_rate, a.stored_peak_mib_mean,
                   a.required_peak_mib_mean, a.peak_ratio_mean, a.peak_contexts_mean, a.rejoin_contexts_mean);

    std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;

    criteria.emplace_back("main noisy separation", [&] {
        Verdict v;
        for (const char* cs : {"A", "B"}) separation(v, g, "noisy", cs);
        return v;
    });
    criteria.emplace_back("quarantine-alone null result", [&] {
        Verdict v;
        for (const char* cs : {"A", "B"}) {
            const double d = g.stats(tag("noisy", cs, "Q_only")).success_rate - g.stats(tag("noisy", cs, "NoQ")).success_rate;
            v.require(std::abs(d) <= 0.05, fmt::format("{} |Q_only-NoQ| {:.3f}", cs, std::abs(d)));
        }
        return v;
    });
    criteria.emplace_back("clean regime", [&] {
        Verdict v;
        for (const char* cs : {"A", "B"}) {
            double lo = 1.0;
            for (const auto& var : kVariants) lo = std::min(lo, g.stats(tag("clean", cs, var)).success_rate);
            v.require(lo >= 0.90, fmt::format("{} min success {:.3f}", cs, lo));
            const double go = mean_rec(g.stats(tag("clean", cs, "Gossip_only")));
            const double nq = mean_rec(g.stats(tag("clean", cs, "NoQ")));
            v.require(go < nq, fmt::format("{} mean recovery Gossip_only {:.2f} < NoQ {:.2f}", cs, go, nq));
        }
        return v;
    });
    criteria.emplace_back("gossip accounting identity", [&] {
        Verdict v;
        for (const char* cs : {"A", "B"}) {
            const double noq = g.stats(tag("noisy", cs, "NoQ")).gossip_pairs_mean;
            const double go = g.stats(tag("noisy", cs, "Gossip_only")).gossip_pairs_mean;
            const double both = g.stats(tag("noisy", cs, "Both")).gossip_pairs_mean;
            const double expect = 2400.0 * (1.0 - 0.02);
            v.require(std::abs(noq / expect - 1.0) <= 0.02, fmt::format("{} NoQ pairs {:.1f} vs {:.1f}", cs, noq, expect));
            v.require(std::abs(go / noq / 4.0 - 1.0) <= 0.02, fmt::format("{} ratio {:.4f}", cs, go / noq));
            v.require(noq < both && both < go, fmt::format("{} {:.1f} < {:.1f} < {:.1f}", cs, noq, both, go));
        }
        return v;
    });
    criteria.emplace_back("ratio robustness at 90/10", [&] {
        Verdict v;
        separation(v, g, "noisy", "C");
        return v;
    });
    criteria.emplace_back("scaling degradation", [&] {
        Verdict v;
        for (const char* var : {"NoQ", "Q_only"}) {
            const double s = g.stats(tag("N50", "A", var)).success_rate;
            v.require(s < 0.30, fmt::format("N50 {} {:.3f}", var, s));
        }
        for (const auto& var : kVariants) {
            const double s20 = g.stats(tag("noisy", "A", var)).success_rate;
            const double s100 = g.stats(tag("N100", "A", var)).success_rate;
            v.require(s20 - s100 >= 0.20, fmt::format("{} N20-N100 {:.3f}", var, s20 - s100));
        }
        return v;
    });
    criteria.emplace_back("budget study efficiency", [&] {
        Verdict v;
        for (const char* cs : {"A", "B"}) {
            const auto& both = g.stats(tag("N50", cs, "Both_1_16"));
            const auto& go = g.stats(tag("N50", cs, "Gossip_only_16_16"));
            const double saving = 1.0 - both.gossip_pairs_mean / go.gossip_pairs_mean;
            v.require(saving >= 0.25, fmt::format("{} pair saving {:.1f}%", cs, 100.0 * saving));
            v.require(std::abs(both.success_rate - go.success_rate) <= 0.10,
                      fmt::format("{} success {:.3f} vs {:.3f}", cs, both.success_rate, go.success_rate));
            v.require(both.success_rate > 0.55 && go.success_rate > 0.55, fmt::format("{} both above 0.55", cs));
        }
        return v;
    });
    criteria.emplace_back("long horizon", [&] {
        Verdict v;
        for (const char* cs : {"A", "B"}) {
            const double d = g.stats(tag("T5400", cs, "NoQ")).success_rate - g.stats(tag("noisy", cs, "NoQ")).success_rate;
            v.require(std::abs(d) <= 0.08, fmt::format("{} NoQ change {:+.3f}", cs, d));
            separation(v, g, "T5400", cs);
        }
        return v;
    });
    criteria.emplace_back("checkpoint-mode robustness", [&] {
        Verdict v;
        double worst_s = 0.0, worst_p = 0.0;
        for (const char* cs : {"A", "B"})
            for (const auto& var : kVariants) {
                const auto& h = g.stats(tag("noisy", cs, var));
                const auto& t = g.stats(tag("cptime", cs, var));
                const double ds = std::abs(h.success_rate - t.success_rate);
                const double dp = std::abs(p95(h) - p95(t));
                worst_s = std::max(worst_s, ds);
                worst_p = std::max(worst_p, std::isnan(dp) ? INFINITY : dp);
                v.require(ds < 0.05 && dp < 20.0, fmt::format("{} {} dsuccess {:.3f} dp95 {:.2f}", cs, var, ds, dp));
            }
        v.notes = {fmt::format("max dsuccess {:.3f}, max dp95 {:.2f} s", worst_s, worst_p)};
        return v;
    });
    criteria.emplace_back("proof-of-context trends", [&] {
        Verdict v;
        const auto& r = g.at("poc/A/Both");
        for (std::size_t i = 1; i < r.poc.size(); ++i) {
            v.require(r.poc[i].challenge_success_mean >= r.poc[i - 1].challenge_success_mean,
                      fmt::format("challenge B={} >= B={}", r.poc[i].budget, r.poc[i - 1].budget));
            v.require(r.poc[i].rejoin_success_rate >= r.poc[i - 1].rejoin_success_rate,
                      fmt::format("rejoin B={} >= B={}", r.poc[i].budget, r.poc[i - 1].budget));
        }
        v.require(r.poc.front().rejoin_success_rate <= 0.05,
                  fmt::format("rejoin at B=1 {:.3f}", r.poc.front().rejoin_success_rate));
        std::size_t covered = 0, exact = 0, same_required = 0;
        double ratio = 0.0;
        for (const auto& run : r.runs) {
            bool same = true;
            for (const auto& s : run.poc) {
                same = same && s.required_peak == run.poc.front().required_peak;
                if (s.budget < s.peak_contexts) continue;
                ++covered;
                exact += s.challenge_success_mean == 1.0 && s.stored_peak == s.required_peak ? 1 : 0;
            }
            same_required += same ? 1 : 0;
            ratio += run.poc.front().peak_ratio;
        }
        ratio /= static_cast<double>(r.runs.size());
        v.require(covered > 0 && exact == covered,
                  fmt::format("full coverage exact in {}/{} (run, budget) cells", exact, covered));
        v.require(same_required == r.runs.size(), fmt::format("required peak budget-free in {}/{} runs",
                                                              same_required, r.runs.size()));
        v.require(ratio > 3.0, fmt::format("peak ratio mean {:.2f}", ratio));
        return v;
    });
    criteria.emplace_back("property suite", [&] {
        Verdict v;
        for (const auto& c : run_selfcheck()) v.require(c.passed, c.name + (c.detail.empty() ? "" : ": " + c.detail));
        return v;
    });

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.notes = {std::string("threw: ") + e.what()};
        }
        std::string notes;
        for (const auto& n : v.notes) notes += (notes.empty() ? "" : "; ") + n;
        fmt::print("{} criterion {:>2} {}: {}\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, notes);
        failed += v.pass ? 0 : 1;
    }
    return failed;
}
