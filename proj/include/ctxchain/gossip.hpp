// Periodic anti-entropy: sampled sender/receiver pairs transfer the missing
// suffix of the sender's head chain; the per-tick pair budget adapts to the
// fraction of quarantined nodes.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxchain/engine.hpp"
#include "ctxchain/ledger.hpp"
#include "ctxchain/netmodel.hpp"

namespace ctxchain {

struct SyncVariant {
    enum class Kind : std::uint8_t { NoQ, Q_only, Gossip_only, Both };

    Kind kind = Kind::NoQ;
    std::uint32_t normal_pairs = 1;
    std::uint32_t quarantine_pairs = 4;
    double q_threshold = 0.25;
    // Budget-study conditions always carry the _a_b suffix in their name.
    bool budget_in_name = false;

    bool quarantine_enabled() const { return kind == Kind::Q_only || kind == Kind::Both; }

    // The bare kind for default budgets, otherwise Name_a_b.
    std::string name() const;

    static SyncVariant make(Kind kind);
    static SyncVariant make(Kind kind, std::uint32_t normal, std::uint32_t quarantine);
    // Accepts "NoQ", "Q_only", "Gossip_only", "Both" and the budgeted forms
    // "Both_1_16", "Gossip_only_16_16" (normal=a, quarantine=b).
    static SyncVariant parse(const std::string& text);
};

const char* kind_name(SyncVariant::Kind kind);

struct GossipCounters {
    std::uint64_t pairs_used = 0;
    std::uint64_t blocks_transferred = 0;
    std::uint64_t pairs_lost = 0;
};

std::uint32_t adaptive_budget(const SyncVariant& variant, double q);

double quarantine_fraction(std::span<const NodeState> nodes);

std::vector<std::pair<NodeId, NodeId>> sample_pairs(std::uint32_t budget, std::size_t n_nodes, RngStream& rng);

struct AncestorSuffix {
    BlockId ancestor;
    std::vector<Block> suffix;
};

// sender_chain runs genesis -> head. The ancestor is the highest chain block
// the receiver has stored; the suffix is every later chain block in order.
AncestorSuffix highest_common_ancestor(const BlockStore& receiver, std::span<const Block> sender_chain);

// Same result as highest_common_ancestor over sender.chain_to(sender_head),
// walking back from the head only as far as needed.
AncestorSuffix missing_suffix(const BlockStore& receiver, const BlockStore& sender, BlockId sender_head);

struct GossipOptions {
    // Count pairs whose transfer was lost as used.
    bool count_lost_pairs = false;
};

void gossip_tick(std::span<NodeState> nodes, double now, const SyncVariant& variant, const NetworkParams& net,
                 const PartitionSchedule* part, const ProtocolParams& protocol, GossipCounters& counters,
                 RngStream& rng, const GossipOptions& options = {});

}  // namespace ctxchain
