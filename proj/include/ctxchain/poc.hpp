// Proof-of-context shadow layer: census of active contexts (distinct node
// heads), a budget-bounded attacker that tracks a subset of them, two-target
// challenges drawn uniformly over the active set, and memory accounting.
//
// The layer only reads node state. Challenge draws come from their own stream
// and do not depend on the attacker budget, so several attackers can observe the
// same run and be compared challenge by challenge.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxchain/engine.hpp"
#include "ctxchain/ledger.hpp"

namespace ctxchain {

struct ContextInfo {
    BlockId id;
    std::uint32_t depth = 0;  // head height
    std::uint32_t cp_level = 0;
    double born_time = 0.0;
    std::uint32_t holders = 0;  // nodes whose head is this context
};

struct ContextSnapshot {
    double time = 0.0;
    std::vector<ContextInfo> active;  // sorted by id

    std::size_t size() const { return active.size(); }
    const ContextInfo* find(BlockId id) const;
};

struct MemoryModel {
    std::uint64_t c0 = 64 * 1024;  // bytes per context
    std::uint64_t c1 = 4 * 1024;   // bytes per block of depth
};

struct AttackerState {
    std::uint32_t budget = 1;
    std::vector<BlockId> tracked;  // sorted by id, size <= budget
    std::uint64_t stored_bytes = 0;
    std::uint64_t stored_peak = 0;
};

ContextSnapshot active_contexts(std::span<const NodeState> nodes, double now);

std::uint64_t context_cost(std::uint32_t depth, std::uint64_t c0, std::uint64_t c1);
inline std::uint64_t context_cost(std::uint32_t depth, const MemoryModel& m) {
    return context_cost(depth, m.c0, m.c1);
}

// Retention order: higher cp_level, then height, then more recent head, then smaller id.
bool context_ranks_above(const ContextInfo& a, const ContextInfo& b);

AttackerState attacker_update(AttackerState att, const ContextSnapshot& snap, const MemoryModel& memory);

// min(2, |active|) distinct contexts drawn uniformly from the snapshot.
std::vector<BlockId> draw_targets(const ContextSnapshot& snap, RngStream& rng);
bool covers(const AttackerState& att, std::span<const BlockId> targets);
bool challenge(const ContextSnapshot& snap, const AttackerState& att, RngStream& rng);

// The context held by the most nodes (ties broken by retention order).
const ContextInfo& dominant_context(const ContextSnapshot& snap);
std::uint64_t required_bytes(const ContextSnapshot& snap, const MemoryModel& memory);

struct PocSummary {
    std::uint32_t budget = 0;
    std::size_t challenges = 0;
    double challenge_success_mean = 0.0;
    std::optional<bool> rejoin_success;
    std::optional<bool> end_success;
    std::uint64_t stored_peak = 0;
    std::uint64_t required_peak = 0;
    std::uint64_t honest_peak = 0;  // dominant-context cost at the required-peak instant
    double peak_ratio = 0.0;
    std::size_t peak_contexts = 0;
    std::size_t rejoin_contexts = 0;
};

// Observes one run on behalf of several budgets.
class PocObserver {
public:
    PocObserver(std::vector<std::uint32_t> budgets, MemoryModel memory, double rejoin_time);

    void on_challenge(std::span<const NodeState> nodes, double now, RngStream& rng);
    std::vector<PocSummary> finish() const;

private:
    MemoryModel memory_;
    double rejoin_;
    std::vector<AttackerState> attackers_;
    std::vector<std::size_t> successes_;
    std::vector<std::optional<bool>> rejoin_success_;
    std::vector<bool> last_success_;
    std::size_t challenges_ = 0;
    std::uint64_t required_peak_ = 0;
    std::uint64_t honest_at_peak_ = 0;
    std::size_t peak_contexts_ = 0;
    std::optional<std::size_t> rejoin_contexts_;
};

struct PocAggregate {
    std::uint32_t budget = 0;
    std::size_t n_runs = 0;
    double challenge_success_mean = 0.0;
    double rejoin_success_rate = 0.0;
    double end_success_rate = 0.0;
    double stored_peak_mib_mean = 0.0;
    double required_peak_mib_mean = 0.0;
    double peak_ratio_mean = 0.0;
    double peak_contexts_mean = 0.0;
    double rejoin_contexts_mean = 0.0;
};

// All summaries must share one budget.
PocAggregate aggregate_poc(std::span<const PocSummary> runs);

std::string poc_csv_header();
std::string poc_csv_row(const PocAggregate& a);

}  // namespace ctxchain
