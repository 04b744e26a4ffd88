#include "ctxchain/poc.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace ctxchain {

const ContextInfo* ContextSnapshot::find(BlockId id) const {
    auto it = std::lower_bound(active.begin(), active.end(), id,
                               [](const ContextInfo& c, BlockId v) { return c.id < v; });
    return it != active.end() && it->id == id ? &*it : nullptr;
}

ContextSnapshot active_contexts(std::span<const NodeState> nodes, double now) {
    if (nodes.empty()) throw ContractViolation("active_contexts: no nodes");
    ContextSnapshot snap;
    snap.time = now;
    for (const NodeState& n : nodes) {
        auto it = std::lower_bound(snap.active.begin(), snap.active.end(), n.head,
                                   [](const ContextInfo& c, BlockId v) { return c.id < v; });
        if (it != snap.active.end() && it->id == n.head) {
            ++it->holders;
            continue;
        }
        const Block& b = n.store.get(n.head);
        snap.active.insert(it, ContextInfo{b.id, b.height, b.cp_level, b.born_time, 1});
    }
    return snap;
}

std::uint64_t context_cost(std::uint32_t depth, std::uint64_t c0, std::uint64_t c1) {
    if (c0 == 0 || c1 == 0) throw ContractViolation("context_cost: c0 and c1 must be positive");
    return c0 + static_cast<std::uint64_t>(depth) * c1;
}

bool context_ranks_above(const ContextInfo& a, const ContextInfo& b) {
    if (a.cp_level != b.cp_level) return a.cp_level > b.cp_level;
    if (a.depth != b.depth) return a.depth > b.depth;
    if (a.born_time != b.born_time) return a.born_time > b.born_time;
    return a.id < b.id;
}

AttackerState attacker_update(AttackerState att, const ContextSnapshot& snap, const MemoryModel& memory) {
    std::vector<ContextInfo> keep = snap.active;
    if (keep.size() > att.budget) {
        std::partial_sort(keep.begin(), keep.begin() + att.budget, keep.end(), context_ranks_above);
        keep.resize(att.budget);
    }
    att.tracked.clear();
    att.stored_bytes = 0;
    for (const ContextInfo& c : keep) {
        att.tracked.push_back(c.id);
        att.stored_bytes += context_cost(c.depth, memory);
    }
    std::sort(att.tracked.begin(), att.tracked.end());
    att.stored_peak = std::max(att.stored_peak, att.stored_bytes);
    return att;
}

std::vector<BlockId> draw_targets(const ContextSnapshot& snap, RngStream& rng) {
    const std::size_t n = snap.size();
    if (n == 0) return {};
    const auto i = static_cast<std::size_t>(rng.below(n));
    if (n == 1) return {snap.active[i].id};
    auto j = static_cast<std::size_t>(rng.below(n - 1));
    if (j >= i) ++j;
    return {snap.active[i].id, snap.active[j].id};
}

bool covers(const AttackerState& att, std::span<const BlockId> targets) {
    return std::all_of(targets.begin(), targets.end(), [&](BlockId t) {
        return std::binary_search(att.tracked.begin(), att.tracked.end(), t);
    });
}

bool challenge(const ContextSnapshot& snap, const AttackerState& att, RngStream& rng) {
    const auto targets = draw_targets(snap, rng);
    return covers(att, targets);
}

const ContextInfo& dominant_context(const ContextSnapshot& snap) {
    if (snap.active.empty()) throw ContractViolation("dominant_context: empty snapshot");
    const ContextInfo* best = &snap.active.front();
    for (const ContextInfo& c : snap.active) {
        if (c.holders > best->holders || (c.holders == best->holders && context_ranks_above(c, *best))) best = &c;
    }
    return *best;
}

std::uint64_t required_bytes(const ContextSnapshot& snap, const MemoryModel& memory) {
    std::uint64_t total = 0;
    for (const ContextInfo& c : snap.active) total += context_cost(c.depth, memory);
    return total;
}

PocObserver::PocObserver(std::vector<std::uint32_t> budgets, MemoryModel memory, double rejoin_time)
    : memory_(memory), rejoin_(rejoin_time) {
    for (std::uint32_t b : budgets) {
        if (b == 0) throw ContractViolation("poc budget must be >= 1");
        AttackerState att;
        att.budget = b;
        attackers_.push_back(att);
    }
    successes_.assign(attackers_.size(), 0);
    rejoin_success_.assign(attackers_.size(), std::nullopt);
    last_success_.assign(attackers_.size(), false);
}

void PocObserver::on_challenge(std::span<const NodeState> nodes, double now, RngStream& rng) {
    const ContextSnapshot snap = active_contexts(nodes, now);
    const auto targets = draw_targets(snap, rng);
    const bool first_after_rejoin = now >= rejoin_ && !rejoin_contexts_;

    const std::uint64_t required = required_bytes(snap, memory_);
    if (required > required_peak_) {
        required_peak_ = required;
        honest_at_peak_ = context_cost(dominant_context(snap).depth, memory_);
    }
    peak_contexts_ = std::max(peak_contexts_, snap.size());
    if (first_after_rejoin) rejoin_contexts_ = snap.size();

    for (std::size_t i = 0; i < attackers_.size(); ++i) {
        attackers_[i] = attacker_update(attackers_[i], snap, memory_);
        const bool ok = covers(attackers_[i], targets);
        if (ok) ++successes_[i];
        last_success_[i] = ok;
        if (first_after_rejoin) rejoin_success_[i] = ok;
    }
    ++challenges_;
}

std::vector<PocSummary> PocObserver::finish() const {
    std::vector<PocSummary> out;
    for (std::size_t i = 0; i < attackers_.size(); ++i) {
        PocSummary s;
        s.budget = attackers_[i].budget;
        s.challenges = challenges_;
        s.challenge_success_mean =
            challenges_ == 0 ? 0.0 : static_cast<double>(successes_[i]) / static_cast<double>(challenges_);
        s.rejoin_success = rejoin_success_[i];
        if (challenges_ > 0) s.end_success = last_success_[i];
        s.stored_peak = attackers_[i].stored_peak;
        s.required_peak = required_peak_;
        s.honest_peak = honest_at_peak_;
        s.peak_ratio = honest_at_peak_ == 0 ? 0.0
                                            : static_cast<double>(required_peak_) / static_cast<double>(honest_at_peak_);
        s.peak_contexts = peak_contexts_;
        s.rejoin_contexts = rejoin_contexts_.value_or(0);
        out.push_back(s);
    }
    return out;
}

namespace {

double sorted_mean(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

constexpr double kMiB = 1024.0 * 1024.0;

}  // namespace

PocAggregate aggregate_poc(std::span<const PocSummary> runs) {
    if (runs.empty()) throw ContractViolation("aggregate_poc: no runs");
    PocAggregate a;
    a.budget = runs.front().budget;
    a.n_runs = runs.size();
    std::vector<double> chall, stored, required, ratio, peak_ctx, rejoin_ctx;
    std::size_t rejoin_ok = 0;
    std::size_t end_ok = 0;
    for (const PocSummary& s : runs) {
        if (s.budget != a.budget) throw ContractViolation("aggregate_poc: mixed budgets");
        chall.push_back(s.challenge_success_mean);
        stored.push_back(static_cast<double>(s.stored_peak) / kMiB);
        required.push_back(static_cast<double>(s.required_peak) / kMiB);
        ratio.push_back(s.peak_ratio);
        peak_ctx.push_back(static_cast<double>(s.peak_contexts));
        rejoin_ctx.push_back(static_cast<double>(s.rejoin_contexts));
        if (s.rejoin_success.value_or(false)) ++rejoin_ok;
        if (s.end_success.value_or(false)) ++end_ok;
    }
    const auto n = static_cast<double>(runs.size());
    a.challenge_success_mean = sorted_mean(chall);
    a.rejoin_success_rate = static_cast<double>(rejoin_ok) / n;
    a.end_success_rate = static_cast<double>(end_ok) / n;
    a.stored_peak_mib_mean = sorted_mean(stored);
    a.required_peak_mib_mean = sorted_mean(required);
    a.peak_ratio_mean = sorted_mean(ratio);
    a.peak_contexts_mean = sorted_mean(peak_ctx);
    a.rejoin_contexts_mean = sorted_mean(rejoin_ctx);
    return a;
}

std::string poc_csv_header() {
    return "budget,challenge_success_mean,rejoin_success_rate,end_success_rate,stored_peak_mib_mean,"
           "required_peak_mib_mean,peak_ratio_mean,peak_contexts_mean,rejoin_contexts_mean";
}

std::string poc_csv_row(const PocAggregate& a) {
    return fmt::format("{},{:.3f},{:.3f},{:.3f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f}", a.budget,
                       a.challenge_success_mean, a.rejoin_success_rate, a.end_success_rate, a.stored_peak_mib_mean,
                       a.required_peak_mib_mean, a.peak_ratio_mean, a.peak_contexts_mean, a.rejoin_contexts_mean);
}

}  // namespace ctxchain
