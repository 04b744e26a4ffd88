#include <doctest.h>

#include <map>
#include <set>

#include "ctxchain/poc.hpp"
#include "oracles.hpp"

using namespace ctxchain;

namespace {

ContextSnapshot snapshot_of(std::vector<ContextInfo> infos) {
    ContextSnapshot s;
    std::sort(infos.begin(), infos.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    s.active = std::move(infos);
    return s;
}

ContextInfo ctx(std::uint64_t id, std::uint32_t depth, std::uint32_t cp = 0, double born = 0.0,
                std::uint32_t holders = 1) {
    return ContextInfo{BlockId{id}, depth, cp, born, holders};
}

// Nodes whose heads are the given blocks; each node stores the full chain.
std::vector<NodeState> nodes_on(const std::vector<Block>& blocks, const std::vector<std::uint64_t>& heads) {
    ProtocolParams p;
    std::vector<NodeState> nodes;
    for (std::size_t i = 0; i < heads.size(); ++i) {
        NodeState n = make_node(static_cast<NodeId>(i), p);
        for (const auto& b : blocks)
            if (b.parent) n.store.insert(b);
        n.head = BlockId{heads[i]};
        nodes.push_back(std::move(n));
    }
    return nodes;
}

}  // namespace

TEST_CASE("context census") {
    const Block g = oracle::genesis();
    std::vector<Block> blocks{g};
    for (std::uint64_t i = 1; i <= 6; ++i) blocks.push_back(oracle::child(g, i, static_cast<NodeId>(i)));

    CHECK(active_contexts(nodes_on(blocks, {1, 1, 1, 1}), 0.0).size() == 1);
    const auto two = active_contexts(nodes_on(blocks, {1, 1, 2, 2, 2}), 0.0);
    CHECK(two.size() == 2);
    CHECK(two.find(BlockId{2})->holders == 3);
    CHECK(dominant_context(two).id == BlockId{2});
    CHECK(active_contexts(nodes_on(blocks, {1, 2, 3, 4, 5, 6}), 0.0).size() == 6);
}

TEST_CASE("context cost") {
    CHECK(context_cost(0, 64 * 1024, 4 * 1024) == 64 * 1024);
    CHECK(context_cost(100, 64 * 1024, 4 * 1024) == 464 * 1024);
    CHECK(context_cost(100, MemoryModel{}) == 464 * 1024);
    for (std::uint32_t d = 0; d < 200; ++d) CHECK(context_cost(d + 1, MemoryModel{}) > context_cost(d, MemoryModel{}));
    CHECK_THROWS_AS(context_cost(1, 0, 1), ContractViolation);
}

TEST_CASE("attacker retention") {
    const MemoryModel m;
    std::vector<ContextInfo> nine;
    for (std::uint64_t i = 1; i <= 9; ++i) nine.push_back(ctx(i, 10 + static_cast<std::uint32_t>(i)));
    const auto snap9 = snapshot_of(nine);
    AttackerState big;
    big.budget = 16;
    big = attacker_update(big, snap9, m);
    CHECK(big.tracked.size() == 9);
    CHECK(big.stored_bytes == required_bytes(snap9, m));

    std::vector<ContextInfo> five(nine.begin(), nine.begin() + 5);
    AttackerState one;
    one.budget = 1;
    one = attacker_update(one, snapshot_of(five), m);
    CHECK(one.tracked.size() == 1);
    CHECK(one.tracked.front() == BlockId{5});  // highest

    const auto pair = snapshot_of({ctx(1, 40), ctx(2, 41)});
    AttackerState keep;
    keep.budget = 1;
    CHECK(attacker_update(keep, pair, m).tracked.front() == BlockId{2});
    // Checkpoint level outranks height.
    CHECK(attacker_update(keep, snapshot_of({ctx(1, 40, 2), ctx(2, 90, 1)}), m).tracked.front() == BlockId{1});
    // Recency, then smaller id.
    CHECK(attacker_update(keep, snapshot_of({ctx(1, 40, 0, 5.0), ctx(2, 40, 0, 9.0)}), m).tracked.front() == BlockId{2});
    CHECK(attacker_update(keep, snapshot_of({ctx(3, 40), ctx(2, 40)}), m).tracked.front() == BlockId{2});

    // The peak never falls.
    AttackerState att;
    att.budget = 2;
    att = attacker_update(att, snap9, m);
    const auto peak = att.stored_peak;
    att = attacker_update(att, snapshot_of({ctx(1, 1)}), m);
    CHECK(att.stored_peak == peak);
    CHECK(att.stored_bytes < peak);
}

TEST_CASE("challenge coverage") {
    const auto snap = snapshot_of({ctx(1, 5), ctx(2, 5), ctx(3, 5)});
    AttackerState all;
    all.tracked = {BlockId{1}, BlockId{2}, BlockId{3}};
    RngStream rng(3, "challenge");
    for (int i = 0; i < 100; ++i) CHECK(challenge(snap, all, rng));

    const auto single = snapshot_of({ctx(7, 5)});
    AttackerState seven;
    seven.tracked = {BlockId{7}};
    CHECK(challenge(single, seven, rng));

    // Brute force over all C(3,2) target pairs with one tracked context.
    for (std::uint64_t t = 1; t <= 3; ++t) {
        AttackerState one;
        one.tracked = {BlockId{t}};
        int covered = 0;
        for (std::uint64_t a = 1; a <= 3; ++a)
            for (std::uint64_t b = a + 1; b <= 3; ++b) {
                const std::vector<BlockId> targets{BlockId{a}, BlockId{b}};
                covered += covers(one, targets) ? 1 : 0;
            }
        CHECK(covered == 0);
        for (int i = 0; i < 200; ++i) REQUIRE_FALSE(challenge(snap, one, rng));
    }
}

TEST_CASE("targets are uniform over unordered pairs") {
    std::vector<ContextInfo> infos;
    for (std::uint64_t i = 1; i <= 5; ++i) infos.push_back(ctx(i, 1));
    const auto snap = snapshot_of(infos);
    RngStream rng(12, "challenge");
    std::map<std::pair<std::uint64_t, std::uint64_t>, int> freq;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const auto t = draw_targets(snap, rng);
        REQUIRE(t.size() == 2);
        REQUIRE(t[0] != t[1]);
        ++freq[{std::min(t[0].value, t[1].value), std::max(t[0].value, t[1].value)}];
    }
    CHECK(freq.size() == 10);
    for (const auto& [k, c] : freq) CHECK(std::abs(c - n / 10) < n / 100);
}

TEST_CASE("observer peaks and rejoin bookkeeping") {
    const Block g = oracle::genesis();
    std::vector<Block> blocks{g};
    Block a = g;
    for (std::uint64_t i = 1; i <= 4; ++i) blocks.push_back(a = oracle::child(a, i, 1));
    blocks.push_back(oracle::child(g, 10, 2));
    blocks.push_back(oracle::child(g, 11, 3));

    const MemoryModel m;
    PocObserver obs({1, 2, 4}, m, 100.0);
    RngStream rng(1, "challenge");
    obs.on_challenge(nodes_on(blocks, {4, 4, 4, 10, 11}), 50.0, rng);  // three contexts
    obs.on_challenge(nodes_on(blocks, {4, 4, 4, 4, 10}), 100.0, rng);  // rejoin, two contexts
    obs.on_challenge(nodes_on(blocks, {4, 4, 4, 4, 4}), 110.0, rng);
    const auto out = obs.finish();
    REQUIRE(out.size() == 3);
    const std::uint64_t required = context_cost(4, m) + 2 * context_cost(1, m);
    for (const auto& s : out) {
        CHECK(s.challenges == 3);
        CHECK(s.required_peak == required);
        CHECK(s.honest_peak == context_cost(4, m));
        CHECK(s.peak_ratio == doctest::Approx(static_cast<double>(required) / context_cost(4, m)));
        CHECK(s.peak_contexts == 3);
        CHECK(s.rejoin_contexts == 2);
        CHECK(*s.end_success);
        CHECK(s.stored_peak <= s.required_peak);
    }
    CHECK_FALSE(*out[0].rejoin_success);  // two targets, one tracked
    CHECK(*out[1].rejoin_success);
    CHECK(out[2].stored_peak == out[2].required_peak);
    CHECK(out[2].challenge_success_mean == 1.0);
    CHECK(out[0].stored_peak == context_cost(4, m));
}

TEST_CASE("poc aggregate and csv") {
    std::vector<PocSummary> runs(2);
    for (auto& r : runs) r.budget = 4;
    runs[0].challenge_success_mean = 0.5;
    runs[1].challenge_success_mean = 1.0;
    runs[0].rejoin_success = true;
    runs[1].rejoin_success = false;
    runs[0].required_peak = 1024 * 1024;
    runs[1].required_peak = 3 * 1024 * 1024;
    const auto a = aggregate_poc(runs);
    CHECK(a.n_runs == 2);
    CHECK(a.challenge_success_mean == doctest::Approx(0.75));
    CHECK(a.rejoin_success_rate == doctest::Approx(0.5));
    CHECK(a.required_peak_mib_mean == doctest::Approx(2.0));
    CHECK(poc_csv_header() ==
          "budget,challenge_success_mean,rejoin_success_rate,end_success_rate,stored_peak_mib_mean,"
          "required_peak_mib_mean,peak_ratio_mean,peak_contexts_mean,rejoin_contexts_mean");
    runs[1].budget = 8;
    CHECK_THROWS_AS(aggregate_poc(runs), ContractViolation);
}
