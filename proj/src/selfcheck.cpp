#include "ctxchain/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "ctxchain/gossip.hpp"
#include "ctxchain/ledger.hpp"
#include "ctxchain/metrics.hpp"
#include "ctxchain/suite.hpp"

namespace ctxchain {

namespace {

// Random tree of n blocks above genesis; ids 1..n, each parent drawn from
// earlier blocks. Proposers come from a small pool so score ties happen.
std::vector<Block> random_tree(std::size_t n, RngStream& rng, const ProtocolParams& params,
                               std::uint32_t proposers = 4) {
    std::vector<Block> blocks{make_genesis()};
    for (std::size_t i = 1; i <= n; ++i) {
        const Block& parent = blocks[rng.below(blocks.size())];
        blocks.push_back(make_child(parent, BlockId{i}, static_cast<NodeId>(rng.below(proposers)),
                                    static_cast<double>(i), params));
    }
    return blocks;
}

template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

CheckResult check_determinism(std::uint64_t seed) {
    CheckResult r{"determinism", true, 0, {}};
    ScenarioConfig cfg;
    cfg.n_nodes = 8;
    cfg.sim_time = 900.0;
    cfg.partition.start = 300.0;
    cfg.partition.end = 600.0;
    cfg.variant = SyncVariant::make(SyncVariant::Kind::Both);
    cfg.seeds = 4;
    cfg.base_seed = seed;
    for (std::uint64_t s = seed; s < seed + cfg.seeds; ++s) {
        ++r.cases;
        const RunResult a = run_one(cfg, s);
        const RunResult b = run_one(cfg, s);
        if (!a.summary.same_outcome(b.summary) || a.final_heads != b.final_heads) {
            r.passed = false;
            r.detail = fmt::format("seed {} produced two different summaries", s);
            return r;
        }
    }
    SuiteSpec suite{"selfcheck", {cfg}};
    const CsvOptions no_timing{false};
    ++r.cases;
    if (summary_csv(run_suite_serial(suite), no_timing) != summary_csv(run_suite(suite, 2), no_timing)) {
        r.passed = false;
        r.detail = "serial and parallel suite CSV differ";
    }
    return r;
}

CheckResult check_fork_choice(RngStream& rng, std::size_t cases) {
    CheckResult r{"fork_choice_argmax", true, 0, {}};
    ProtocolParams params;
    params.epoch_len = 3;
    for (std::size_t c = 0; c < cases && r.passed; ++c, ++r.cases) {
        const auto blocks = random_tree(1 + rng.below(25), rng, params);
        BlockStore store;
        for (std::size_t i = 1; i < blocks.size(); ++i) store.insert(blocks[i]);
        ReputationTable rep;
        for (NodeId p = 0; p < 4; ++p) {
            // Coarse values give exact score ties.
            const auto k = rng.below(5);
            if (k < 2) rep.penalize(p, 1.0);
            else rep.reward(p, 0.25 * static_cast<double>(k));
        }
        const std::uint32_t tail = 1 + static_cast<std::uint32_t>(rng.below(6));

        using Key = std::tuple<std::uint32_t, std::uint32_t, double, std::int64_t>;
        std::optional<std::pair<Key, BlockId>> best;
        for (BlockId t : store.tips()) {
            const auto chain = store.chain_to(t);
            double score = 0.0;
            for (std::size_t i = 0; i < chain.size() && i < tail; ++i) {
                const Block& b = store.get(chain[chain.size() - 1 - i]);
                score += std::log1p(std::max(0.0, rep.get(b.proposer)));
            }
            const Block& tb = store.get(t);
            const Key key{tb.cp_level, tb.height, score, -static_cast<std::int64_t>(t.value)};
            if (!best || key > best->first) best = {key, t};
        }
        const BlockId got = fork_choice(store.tips(), store, rep, tail);
        if (got != best->second) {
            r.passed = false;
            r.detail = fmt::format("case {}: fork_choice {} but argmax {}", c, to_string(got),
                                   to_string(best->second));
        }
    }
    return r;
}

CheckResult check_quarantine(RngStream& rng, std::size_t cases) {
    CheckResult r{"quarantine_automaton", true, 0, {}};
    for (std::size_t c = 0; c < cases && r.passed; ++c, ++r.cases) {
        ProtocolParams params;
        params.off_streak = 1 + static_cast<std::uint32_t>(rng.below(6));
        // Reference: explicit two-mode automaton over (mode, streak).
        enum class Mode { normal, quarantined };
        Mode mode = Mode::normal;
        std::uint32_t streak = 0;
        QuarantineState qs;
        for (int step = 0; step < 200; ++step) {
            const double ema = rng.uniform(0.0, 1.6);
            switch (mode) {
                case Mode::normal:
                    if (ema > params.t_on) mode = Mode::quarantined, streak = 0;
                    break;
                case Mode::quarantined:
                    streak = ema < params.t_off ? streak + 1 : 0;
                    if (streak == params.off_streak) mode = Mode::normal, streak = 0;
                    break;
            }
            qs = update_quarantine(qs, ema, params);
            if (qs.quarantined != (mode == Mode::quarantined) || qs.off_streak != streak || qs.ema != ema) {
                r.passed = false;
                r.detail = fmt::format("case {} step {}: ema {} diverged from reference", c, step, ema);
                break;
            }
        }
    }
    return r;
}

CheckResult check_hca(RngStream& rng, std::size_t cases) {
    CheckResult r{"hca_suffix", true, 0, {}};
    ProtocolParams params;
    for (std::size_t c = 0; c < cases && r.passed; ++c, ++r.cases) {
        const auto blocks = random_tree(1 + rng.below(30), rng, params);
        BlockStore sender;
        for (std::size_t i = 1; i < blocks.size(); ++i) sender.insert(blocks[i]);
        // Receiver holds an ancestor-closed random subset.
        std::set<BlockId> held{kGenesisId};
        BlockStore receiver;
        for (std::size_t i = 1; i < blocks.size(); ++i)
            if (held.contains(*blocks[i].parent) && rng.bernoulli(0.6)) {
                held.insert(blocks[i].id);
                receiver.insert(blocks[i]);
            }
        const auto& tips = sender.tips();
        const BlockId head = *std::next(tips.begin(), static_cast<std::ptrdiff_t>(rng.below(tips.size())));

        const auto chain = sender.chain_to(head);
        BlockId ancestor = kGenesisId;
        for (BlockId id : chain)
            if (held.contains(id) && sender.get(id).height >= sender.get(ancestor).height) ancestor = id;
        std::vector<Block> expected;
        for (BlockId id : chain)
            if (sender.get(id).height > sender.get(ancestor).height) expected.push_back(sender.get(id));

        std::vector<Block> chain_blocks;
        for (BlockId id : chain) chain_blocks.push_back(sender.get(id));
        const auto hca = highest_common_ancestor(receiver, chain_blocks);
        const auto fast = missing_suffix(receiver, sender, head);
        if (hca.ancestor != ancestor || hca.suffix != expected || fast.ancestor != ancestor ||
            fast.suffix != expected) {
            r.passed = false;
            r.detail = fmt::format("case {}: expected ancestor {}, hca {}, fast path {}", c, to_string(ancestor),
                                   to_string(hca.ancestor), to_string(fast.ancestor));
        }
    }
    return r;
}

CheckResult check_orphan_drain(RngStream& rng, std::size_t cases) {
    CheckResult r{"orphan_drain", true, 0, {}};
    for (std::size_t c = 0; c < cases && r.passed; ++c, ++r.cases) {
        ProtocolParams params;
        params.quarantine_enabled = rng.bernoulli(0.5);
        auto blocks = random_tree(1 + rng.below(40), rng, params);
        const std::size_t n = blocks.size() - 1;
        std::vector<Block> arrivals(blocks.begin() + 1, blocks.end());
        shuffle(arrivals, rng);
        // Some blocks arrive twice.
        for (std::size_t i = 0, extra = rng.below(4); i < extra; ++i) arrivals.push_back(arrivals[rng.below(n)]);
        NodeState node = make_node(0, params);
        for (const Block& b : arrivals) on_block(node, b, params);
        if (node.store.size() != n + 1 || node.store.orphan_count() != 0 || node.counters.accepted != n ||
            !node.store.contains(node.head)) {
            r.passed = false;
            r.detail = fmt::format("case {}: stored {} of {}, {} orphans left", c, node.store.size() - 1, n,
                                   node.store.orphan_count());
        }
    }
    return r;
}

CheckResult check_ema(RngStream& rng, std::size_t cases) {
    CheckResult r{"ema_convexity", true, 0, {}};
    for (std::size_t c = 0; c < cases * 10 && r.passed; ++c, ++r.cases) {
        const double prev = rng.uniform(0.0, 5.0);
        const double snap = rng.uniform(0.0, 5.0);
        const double alpha = c % 10 == 0 ? static_cast<double>(rng.below(2)) : rng.uniform();
        const double e = update_ema(prev, snap, alpha);
        if (e < std::min(prev, snap) || e > std::max(prev, snap)) {
            r.passed = false;
            r.detail = fmt::format("ema({}, {}, {}) = {} leaves the segment", prev, snap, alpha, e);
        }
    }
    return r;
}

// Order statistic k (0-based) by counting, without sorting.
double order_statistic(const std::vector<double>& v, std::size_t k) {
    for (double x : v) {
        const auto below = static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [x](double y) { return y < x; }));
        const auto upto = static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [x](double y) { return y <= x; }));
        if (below <= k && k < upto) return x;
    }
    return NAN;
}

CheckResult check_percentile(RngStream& rng, std::size_t cases) {
    CheckResult r{"percentile", true, 0, {}};
    for (std::size_t c = 0; c < cases && r.passed; ++c, ++r.cases) {
        std::vector<double> v(1 + rng.below(40));
        for (double& x : v) x = static_cast<double>(rng.below(20)) + (rng.bernoulli(0.5) ? rng.uniform() : 0.0);
        const double p = c % 5 == 0 ? static_cast<double>(rng.below(2)) : rng.uniform();
        const double rank = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(rank));
        const auto hi = static_cast<std::size_t>(std::ceil(rank));
        const double a = order_statistic(v, lo);
        const double b = order_statistic(v, hi);
        const double expected = a + (rank - static_cast<double>(lo)) * (b - a);
        const double got = percentile(v, p);
        if (std::abs(got - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
            r.passed = false;
            r.detail = fmt::format("case {}: percentile {} over {} values gave {}, expected {}", c, p, v.size(),
                                   got, expected);
        }
    }
    return r;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const std::optional<double>& a, const std::optional<double>& b) {
    return a.has_value() == b.has_value() && (!a || same_bits(*a, *b));
}

bool identical(const AggregateStats& a, const AggregateStats& b) {
    return a.n_seeds == b.n_seeds && same_bits(a.success_rate, b.success_rate) && a.n_recovered == b.n_recovered &&
           same_bits(a.recovery_mean_s, b.recovery_mean_s) && same_bits(a.recovery_p95_s, b.recovery_p95_s) &&
           same_bits(a.gossip_pairs_mean, b.gossip_pairs_mean) &&
           same_bits(a.blocks_transferred_mean, b.blocks_transferred_mean) &&
           same_bits(a.total_bytes_est_mean, b.total_bytes_est_mean) &&
           same_bits(a.runtime_mean_ms, b.runtime_mean_ms);
}

CheckResult check_aggregation(RngStream& rng, std::size_t cases) {
    CheckResult r{"aggregation_merge", true, 0, {}};
    for (std::size_t c = 0; c < cases && r.passed; ++c, ++r.cases) {
        std::vector<RunSummary> runs(1 + rng.below(60));
        for (std::size_t i = 0; i < runs.size(); ++i) {
            RunSummary& s = runs[i];
            s.seed = i;
            s.success_end = rng.bernoulli(0.7);
            if (rng.bernoulli(0.8)) s.recovery_s = rng.uniform(0.0, 1200.0);
            s.pairs_used = rng.below(10000);
            s.blocks_transferred = rng.below(500);
            s.bytes_est = rng.below(1u << 20);
            s.runtime_ms = rng.uniform(0.1, 20.0);
        }
        const AggregateStats whole = aggregate(runs);

        // Split into random batches, then merge them in a shuffled order.
        std::vector<SummaryAccumulator> parts(1 + rng.below(6));
        auto order = runs;
        shuffle(order, rng);
        for (const auto& s : order) parts[rng.below(parts.size())].add(s);
        shuffle(parts, rng);
        SummaryAccumulator merged;
        for (const auto& p : parts) merged.merge(p);
        if (!identical(whole, merged.finish())) {
            r.passed = false;
            r.detail = fmt::format("case {}: merged aggregate of {} runs differs", c, runs.size());
        }
    }
    return r;
}

}  // namespace

std::vector<CheckResult> run_selfcheck(std::uint64_t seed, std::size_t cases) {
    RngStream rng(seed, "selfcheck");
    std::vector<CheckResult> out;
    auto guarded = [&out](const char* name, const std::function<CheckResult()>& f) {
        try {
            out.push_back(f());
        } catch (const std::exception& e) {
            out.push_back({name, false, 0, std::string("threw: ") + e.what()});
        }
    };
    guarded("determinism", [&] { return check_determinism(seed); });
    guarded("fork_choice_argmax", [&] { return check_fork_choice(rng, cases); });
    guarded("quarantine_automaton", [&] { return check_quarantine(rng, cases); });
    guarded("hca_suffix", [&] { return check_hca(rng, cases); });
    guarded("orphan_drain", [&] { return check_orphan_drain(rng, cases); });
    guarded("ema_convexity", [&] { return check_ema(rng, cases); });
    guarded("percentile", [&] { return check_percentile(rng, cases); });
    guarded("aggregation_merge", [&] { return check_aggregation(rng, cases); });
    return out;
}

}  // namespace ctxchain
