// Node-local contextual authentication: block storage, checkpointing,
// equivocation handling, branch scoring, fork choice, the inconsistency /
// quarantine state machine and head switching.
//
// A node accepts a block in a fixed order (see on_block): duplicate and orphan
// filtering, equivocation bookkeeping, insertion, inconsistency EMA and
// quarantine update, fork choice, head switch, reorg recording, proposer reward.

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <ranges>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ctxchain/types.hpp"

namespace ctxchain {

enum class CheckpointMode : std::uint8_t { height, time };
enum class LogBase : std::uint8_t { natural, ten };

inline constexpr double kEquivocationPenalty = 1.0;
inline constexpr double kProposerReward = 0.05;

struct ProtocolParams {
    std::uint32_t epoch_len = 30;  // E, in blocks
    CheckpointMode cp_mode = CheckpointMode::height;
    // Time mode: one checkpoint epoch lasts epoch_len * block_interval seconds.
    double block_interval = 30.0;
    double alpha = 0.85;
    double t_on = 1.05;
    double t_off = 0.75;
    std::uint32_t off_streak = 25;  // S
    std::uint32_t tail_len = 20;    // L
    std::size_t window = 50;        // W
    double score_margin = 0.15;
    bool quarantine_enabled = false;
    LogBase log_base = LogBase::natural;

    void validate() const;
};

struct Block {
    BlockId id;
    std::optional<BlockId> parent;  // absent only for genesis
    std::uint32_t height = 0;
    NodeId proposer = 0;
    std::uint32_t cp_level = 0;
    BlockId cp_hash;  // metadata only, never consulted by fork choice
    double born_time = 0.0;

    friend bool operator==(const Block&, const Block&) = default;
};

Block make_genesis();

// Compact local DAG with a children index, tip set and orphan buffer.
class BlockStore {
public:
    BlockStore();
    explicit BlockStore(const Block& genesis);

    bool contains(BlockId id) const { return blocks_.contains(id); }
    bool is_orphan(BlockId id) const { return orphan_ids_.contains(id); }
    bool knows(BlockId id) const { return contains(id) || is_orphan(id); }

    const Block& get(BlockId id) const;
    const Block* find(BlockId id) const;
    const std::vector<BlockId>& children(BlockId id) const;
    const std::set<BlockId>& tips() const { return tips_; }
    BlockId genesis() const { return genesis_; }

    std::size_t size() const { return blocks_.size(); }
    std::size_t orphan_count() const { return orphan_ids_.size(); }

    // The parent must already be stored; duplicates are ignored.
    void insert(const Block& b);
    void add_orphan(const Block& b);
    // Removes and returns the orphans waiting on `parent`, in arrival order.
    std::vector<Block> take_orphans(BlockId parent);
    // Ids currently buffered, keyed by the missing parent.
    const std::unordered_map<BlockId, std::vector<Block>>& orphans() const { return orphans_; }

    std::uint32_t max_tip_height() const;
    // Block ids from genesis to tip inclusive.
    std::vector<BlockId> chain_to(BlockId tip) const;
    // Highest block that is an ancestor of (or equal to) both a and b.
    BlockId common_ancestor(BlockId a, BlockId b) const;

private:
    BlockId genesis_;
    std::unordered_map<BlockId, Block> blocks_;
    std::unordered_map<BlockId, std::vector<BlockId>> children_;
    std::set<BlockId> tips_;
    std::unordered_map<BlockId, std::vector<Block>> orphans_;
    std::unordered_set<BlockId> orphan_ids_;
};

class ReputationTable {
public:
    double get(NodeId p) const { return p < values_.size() ? values_[p] : 0.0; }
    void penalize(NodeId p, double amount);
    void reward(NodeId p, double amount);

private:
    double& slot(NodeId p);
    std::vector<double> values_;
};

struct WindowEntry {
    enum class Kind : std::uint8_t { reorg, equivocation };
    Kind kind = Kind::reorg;
    std::uint32_t magnitude = 0;  // reorg only
};

// Bounded FIFO of recent reorg / equivocation events.
class RecentWindow {
public:
    explicit RecentWindow(std::size_t capacity = 50);

    void push_reorg(std::uint32_t magnitude);
    void push_equivocation();

    // Largest reorg magnitude among windowed entries (0 if none).
    std::uint32_t reorg_recent() const;
    std::uint32_t equiv_recent() const;

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<WindowEntry>& entries() const { return entries_; }

private:
    void push(WindowEntry e);

    std::size_t capacity_;
    std::deque<WindowEntry> entries_;
};

// First block id seen for each (proposer, height).
using EquivocationLog = std::map<std::pair<NodeId, std::uint32_t>, BlockId>;

struct QuarantineState {
    double ema = 0.0;
    bool quarantined = false;
    std::uint32_t off_streak = 0;

    friend bool operator==(const QuarantineState&, const QuarantineState&) = default;
};

struct NodeCounters {
    std::uint64_t accepted = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t orphaned = 0;
    std::uint64_t malformed = 0;
    std::uint64_t equivocations = 0;
    std::uint64_t head_changes = 0;
    std::uint64_t reorgs = 0;  // head changes with magnitude > 0
    std::uint32_t max_forktop = 0;
};

struct NodeState {
    NodeId id = 0;
    BlockStore store;
    BlockId head = kGenesisId;
    ReputationTable reputation;
    EquivocationLog equivocation_log;
    RecentWindow window;
    QuarantineState quarantine;
    NodeCounters counters;
};

NodeState make_node(NodeId id, const ProtocolParams& params);

// Height-mode rule: level increments when height is a multiple of epoch_len.
std::uint32_t checkpoint_level(std::uint32_t parent_level, std::uint32_t height, std::uint32_t epoch_len);
// Time-mode rule: level increments when born_time enters a later epoch of
// epoch_seconds than the parent's born_time.
std::uint32_t checkpoint_level_time(std::uint32_t parent_level, double parent_born_time, double born_time,
                                    double epoch_seconds);

// Builds the block a proposer creates on top of `parent`.
Block make_child(const Block& parent, BlockId id, NodeId proposer, double born_time,
                 const ProtocolParams& params);

double branch_score(BlockId tip, const BlockStore& store, const ReputationTable& rep, std::uint32_t tail_len);

// True iff a ranks strictly above b under (cp_level, height, branch_score, -id).
bool fork_prefers(BlockId a, BlockId b, const BlockStore& store, const ReputationTable& rep,
                  std::uint32_t tail_len);

template <std::ranges::input_range Tips>
BlockId fork_choice(const Tips& tips, const BlockStore& store, const ReputationTable& rep,
                    std::uint32_t tail_len) {
    auto it = std::ranges::begin(tips);
    const auto last = std::ranges::end(tips);
    if (it == last) throw ContractViolation("fork_choice: empty tip set");
    BlockId best = *it;
    for (++it; it != last; ++it) {
        if (fork_prefers(*it, best, store, rep, tail_len)) best = *it;
    }
    return best;
}

// Records the first id per (proposer, height). On a conflicting id, penalizes
// the proposer, pushes an equivocation entry and returns true.
bool detect_equivocation(NodeId proposer, std::uint32_t height, BlockId new_id, EquivocationLog& log,
                         ReputationTable& rep, RecentWindow& window);

double inconsistency_snapshot(double forktop, double reorg_recent, double equiv_recent,
                              LogBase base = LogBase::natural);

double update_ema(double prev, double snapshot, double alpha);

// Applies the hysteresis rule to a state whose EMA has just become `ema`.
QuarantineState update_quarantine(QuarantineState qs, double ema, const ProtocolParams& params);

BlockId maybe_switch_head(BlockId current, BlockId candidate, bool quarantined, const BlockStore& store,
                          const ReputationTable& rep, std::uint32_t tail_len, double margin);

// Number of tips at the maximum tip height.
std::uint32_t forktop(const BlockStore& store);

// Rollback depth when moving from old_head to new_head.
std::uint32_t reorg_magnitude(const BlockStore& store, BlockId old_head, BlockId new_head);

enum class BlockOutcome : std::uint8_t { duplicate, orphaned, accepted, malformed };

// Handles one arriving block. Accepting a block also accepts every orphan it
// unblocks, each going through the full acceptance sequence.
BlockOutcome on_block(NodeState& node, const Block& b, const ProtocolParams& params);

}  // namespace ctxchain
