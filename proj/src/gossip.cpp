#include "ctxchain/gossip.hpp"

#include <algorithm>
#include <charconv>

namespace ctxchain {

const char* kind_name(SyncVariant::Kind kind) {
    switch (kind) {
        case SyncVariant::Kind::NoQ: return "NoQ";
        case SyncVariant::Kind::Q_only: return "Q_only";
        case SyncVariant::Kind::Gossip_only: return "Gossip_only";
        case SyncVariant::Kind::Both: return "Both";
    }
    return "?";
}

SyncVariant SyncVariant::make(Kind kind) {
    SyncVariant v;
    v.kind = kind;
    return v;
}

SyncVariant SyncVariant::make(Kind kind, std::uint32_t normal, std::uint32_t quarantine) {
    SyncVariant v;
    v.kind = kind;
    v.normal_pairs = normal;
    v.quarantine_pairs = quarantine;
    v.budget_in_name = true;
    return v;
}

std::string SyncVariant::name() const {
    if (!budget_in_name && normal_pairs == 1 && quarantine_pairs == 4) return kind_name(kind);
    return std::string(kind_name(kind)) + "_" + std::to_string(normal_pairs) + "_" +
           std::to_string(quarantine_pairs);
}

namespace {

bool parse_u32(std::string_view s, std::uint32_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

SyncVariant SyncVariant::parse(const std::string& text) {
    for (Kind k : {Kind::Gossip_only, Kind::Q_only, Kind::NoQ, Kind::Both}) {
        const std::string base = kind_name(k);
        if (text == base) return make(k);
        if (text.size() > base.size() + 1 && text.starts_with(base + "_")) {
            const std::string_view rest = std::string_view(text).substr(base.size() + 1);
            const auto us = rest.find('_');
            std::uint32_t a = 0;
            std::uint32_t b = 0;
            if (us != std::string_view::npos && parse_u32(rest.substr(0, us), a) &&
                parse_u32(rest.substr(us + 1), b)) {
                return make(k, a, b);
            }
        }
    }
    throw ContractViolation("unknown variant \"" + text + "\"");
}

std::uint32_t adaptive_budget(const SyncVariant& variant, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw ContractViolation("adaptive_budget: q must lie in [0, 1]");
    switch (variant.kind) {
        case SyncVariant::Kind::NoQ:
        case SyncVariant::Kind::Q_only: return variant.normal_pairs;
        case SyncVariant::Kind::Gossip_only: return variant.quarantine_pairs;
        case SyncVariant::Kind::Both:
            return q >= variant.q_threshold ? variant.quarantine_pairs : variant.normal_pairs;
    }
    return variant.normal_pairs;
}

double quarantine_fraction(std::span<const NodeState> nodes) {
    if (nodes.empty()) throw ContractViolation("quarantine_fraction: no nodes");
    const auto q = std::count_if(nodes.begin(), nodes.end(),
                                 [](const NodeState& n) { return n.quarantine.quarantined; });
    return static_cast<double>(q) / static_cast<double>(nodes.size());
}

std::vector<std::pair<NodeId, NodeId>> sample_pairs(std::uint32_t budget, std::size_t n_nodes, RngStream& rng) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    if (n_nodes < 2) return pairs;
    pairs.reserve(budget);
    for (std::uint32_t i = 0; i < budget; ++i) {
        const auto sender = static_cast<NodeId>(rng.below(n_nodes));
        // Uniform over the other n-1 nodes.
        auto receiver = static_cast<NodeId>(rng.below(n_nodes - 1));
        if (receiver >= sender) ++receiver;
        pairs.emplace_back(sender, receiver);
    }
    return pairs;
}

AncestorSuffix highest_common_ancestor(const BlockStore& receiver, std::span<const Block> sender_chain) {
    if (sender_chain.empty() || sender_chain.front().parent)
        throw ContractViolation("highest_common_ancestor: sender chain must start at genesis");
    std::size_t i = sender_chain.size();
    while (i > 0 && !receiver.contains(sender_chain[i - 1].id)) --i;
    if (i == 0) throw ContractViolation("highest_common_ancestor: receiver lacks the genesis block");
    AncestorSuffix out{sender_chain[i - 1].id, {}};
    out.suffix.assign(sender_chain.begin() + static_cast<std::ptrdiff_t>(i), sender_chain.end());
    return out;
}

AncestorSuffix missing_suffix(const BlockStore& receiver, const BlockStore& sender, BlockId sender_head) {
    AncestorSuffix out;
    const Block* b = &sender.get(sender_head);
    while (!receiver.contains(b->id)) {
        out.suffix.push_back(*b);
        if (!b->parent) throw ContractViolation("missing_suffix: receiver lacks the genesis block");
        b = &sender.get(*b->parent);
    }
    out.ancestor = b->id;
    std::reverse(out.suffix.begin(), out.suffix.end());
    return out;
}

void gossip_tick(std::span<NodeState> nodes, double now, const SyncVariant& variant, const NetworkParams& net,
                 const PartitionSchedule* part, const ProtocolParams& protocol, GossipCounters& counters,
                 RngStream& rng, const GossipOptions& options) {
    if (part != nullptr && is_partitioned(now, *part)) return;
    if (nodes.empty()) return;
    const double q = quarantine_fraction(nodes);
    const std::uint32_t budget = adaptive_budget(variant, q);
    for (auto [s, r] : sample_pairs(budget, nodes.size(), rng)) {
        const bool lost = rng.uniform() < net.drop_prob;
        if (lost) {
            ++counters.pairs_lost;
            if (!options.count_lost_pairs) continue;
            ++counters.pairs_used;
            continue;
        }
        ++counters.pairs_used;
        const NodeState& sender = nodes[s];
        NodeState& receiver = nodes[r];
        AncestorSuffix transfer = missing_suffix(receiver.store, sender.store, sender.head);
        for (const Block& b : transfer.suffix) on_block(receiver, b, protocol);
        counters.blocks_transferred += transfer.suffix.size();
    }
}

}  // namespace ctxchain
