// Brute-force references and generators shared by the unit and property tests.
// Nothing here calls the library routine it is meant to check.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "ctxchain/engine.hpp"
#include "ctxchain/ledger.hpp"

namespace oracle {

using namespace ctxchain;

// Parent map walk: ids from genesis to `tip`.
inline std::vector<BlockId> chain(const std::map<BlockId, Block>& all, BlockId tip) {
    std::vector<BlockId> out;
    for (const Block* b = &all.at(tip);; b = &all.at(*b->parent)) {
        out.push_back(b->id);
        if (!b->parent) break;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

inline std::uint32_t reorg_magnitude(const std::map<BlockId, Block>& all, BlockId old_head, BlockId new_head) {
    const auto a = chain(all, old_head);
    const auto b = chain(all, new_head);
    const std::set<BlockId> in_b(b.begin(), b.end());
    std::uint32_t hca_height = 0;
    for (BlockId id : a)
        if (in_b.contains(id)) hca_height = std::max(hca_height, all.at(id).height);
    return all.at(old_head).height - hca_height;
}

inline std::set<BlockId> tips(const std::map<BlockId, Block>& all) {
    std::set<BlockId> t;
    for (const auto& [id, b] : all) t.insert(id);
    for (const auto& [id, b] : all)
        if (b.parent) t.erase(*b.parent);
    return t;
}

inline std::uint32_t forktop(const std::map<BlockId, Block>& all) {
    std::uint32_t hmax = 0;
    for (BlockId t : tips(all)) hmax = std::max(hmax, all.at(t).height);
    std::uint32_t n = 0;
    for (BlockId t : tips(all)) n += all.at(t).height == hmax ? 1 : 0;
    return n;
}

inline Block genesis() {
    Block g;
    g.id = kGenesisId;
    g.cp_hash = kGenesisId;
    return g;
}

// Hand-rolled child: cp_level steps when height is a multiple of epoch_len.
inline Block child(const Block& parent, std::uint64_t id, NodeId proposer, std::uint32_t epoch_len = 30) {
    Block b;
    b.id = BlockId{id};
    b.parent = parent.id;
    b.height = parent.height + 1;
    b.proposer = proposer;
    const bool step = b.height % epoch_len == 0;
    b.cp_level = parent.cp_level + (step ? 1 : 0);
    b.cp_hash = step ? b.id : parent.cp_hash;
    b.born_time = static_cast<double>(id);
    return b;
}

// Random tree with ids 1..n over genesis; parents are earlier blocks.
inline std::vector<Block> random_tree(std::size_t n, RngStream& rng, std::uint32_t proposers,
                                      std::uint32_t epoch_len) {
    std::vector<Block> blocks{genesis()};
    for (std::size_t i = 1; i <= n; ++i) {
        const Block parent = blocks[rng.below(blocks.size())];
        blocks.push_back(child(parent, i, static_cast<NodeId>(rng.below(proposers)), epoch_len));
    }
    return blocks;
}

template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

inline std::map<BlockId, Block> index(const std::vector<Block>& blocks) {
    std::map<BlockId, Block> m;
    for (const auto& b : blocks) m.emplace(b.id, b);
    return m;
}

}  // namespace oracle
