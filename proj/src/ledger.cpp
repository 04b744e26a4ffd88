#include "ctxchain/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ctxchain {

void ProtocolParams::validate() const {
    if (epoch_len < 1) throw ContractViolation("protocol.epoch_len must be >= 1");
    if (!(block_interval > 0.0)) throw ContractViolation("protocol.block_interval must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractViolation("protocol.alpha must lie in [0, 1]");
    if (!(t_off <= t_on)) throw ContractViolation("protocol.t_off must be <= protocol.t_on");
    if (off_streak < 1) throw ContractViolation("protocol.off_streak must be >= 1");
    if (tail_len < 1) throw ContractViolation("protocol.tail_len must be >= 1");
    if (window < 1) throw ContractViolation("protocol.window must be >= 1");
    if (!(score_margin >= 0.0)) throw ContractViolation("protocol.score_margin must be >= 0");
}

Block make_genesis() {
    Block g;
    g.id = kGenesisId;
    g.cp_hash = kGenesisId;
    return g;
}

BlockStore::BlockStore() : BlockStore(make_genesis()) {}

BlockStore::BlockStore(const Block& genesis) : genesis_(genesis.id) {
    blocks_.emplace(genesis.id, genesis);
    tips_.insert(genesis.id);
}

const Block& BlockStore::get(BlockId id) const {
    auto it = blocks_.find(id);
    if (it == blocks_.end()) throw ContractViolation("BlockStore::get: unknown block " + to_string(id));
    return it->second;
}

const Block* BlockStore::find(BlockId id) const {
    auto it = blocks_.find(id);
    return it == blocks_.end() ? nullptr : &it->second;
}

const std::vector<BlockId>& BlockStore::children(BlockId id) const {
    static const std::vector<BlockId> kNone;
    auto it = children_.find(id);
    return it == children_.end() ? kNone : it->second;
}

void BlockStore::insert(const Block& b) {
    if (contains(b.id)) return;
    if (!b.parent || !contains(*b.parent))
        throw ContractViolation("BlockStore::insert: parent of " + to_string(b.id) + " is not stored");
    blocks_.emplace(b.id, b);
    children_[*b.parent].push_back(b.id);
    tips_.erase(*b.parent);
    tips_.insert(b.id);
}

void BlockStore::add_orphan(const Block& b) {
    if (knows(b.id) || !b.parent) return;
    orphans_[*b.parent].push_back(b);
    orphan_ids_.insert(b.id);
}

std::vector<Block> BlockStore::take_orphans(BlockId parent) {
    auto it = orphans_.find(parent);
    if (it == orphans_.end()) return {};
    std::vector<Block> out = std::move(it->second);
    orphans_.erase(it);
    for (const Block& b : out) orphan_ids_.erase(b.id);
    return out;
}

std::uint32_t BlockStore::max_tip_height() const {
    std::uint32_t h = 0;
    for (BlockId t : tips_) h = std::max(h, get(t).height);
    return h;
}

std::vector<BlockId> BlockStore::chain_to(BlockId tip) const {
    std::vector<BlockId> chain;
    const Block* b = &get(tip);
    chain.reserve(b->height + 1);
    while (true) {
        chain.push_back(b->id);
        if (!b->parent) break;
        b = &get(*b->parent);
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

BlockId BlockStore::common_ancestor(BlockId a, BlockId b) const {
    const Block* x = &get(a);
    const Block* y = &get(b);
    while (x->height > y->height) x = &get(*x->parent);
    while (y->height > x->height) y = &get(*y->parent);
    while (x->id != y->id) {
        x = &get(*x->parent);
        y = &get(*y->parent);
    }
    return x->id;
}

double& ReputationTable::slot(NodeId p) {
    if (p >= values_.size()) values_.resize(static_cast<std::size_t>(p) + 1, 0.0);
    return values_[p];
}

void ReputationTable::penalize(NodeId p, double amount) {
    double& r = slot(p);
    r = std::max(0.0, r - amount);
}

void ReputationTable::reward(NodeId p, double amount) {
    double& r = slot(p);
    r = std::max(0.0, r + amount);
}

RecentWindow::RecentWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ContractViolation("RecentWindow capacity must be >= 1");
}

void RecentWindow::push(WindowEntry e) {
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(e);
}

void RecentWindow::push_reorg(std::uint32_t magnitude) {
    push({WindowEntry::Kind::reorg, magnitude});
}

void RecentWindow::push_equivocation() {
    push({WindowEntry::Kind::equivocation, 0});
}

std::uint32_t RecentWindow::reorg_recent() const {
    std::uint32_t m = 0;
    for (const auto& e : entries_)
        if (e.kind == WindowEntry::Kind::reorg) m = std::max(m, e.magnitude);
    return m;
}

std::uint32_t RecentWindow::equiv_recent() const {
    return static_cast<std::uint32_t>(std::count_if(entries_.begin(), entries_.end(), [](const WindowEntry& e) {
        return e.kind == WindowEntry::Kind::equivocation;
    }));
}

NodeState make_node(NodeId id, const ProtocolParams& params) {
    NodeState n;
    n.id = id;
    n.head = n.store.genesis();
    n.window = RecentWindow(params.window);
    return n;
}

std::uint32_t checkpoint_level(std::uint32_t parent_level, std::uint32_t height, std::uint32_t epoch_len) {
    if (epoch_len < 1) throw ContractViolation("checkpoint_level: epoch_len must be >= 1");
    return height % epoch_len == 0 ? parent_level + 1 : parent_level;
}

std::uint32_t checkpoint_level_time(std::uint32_t parent_level, double parent_born_time, double born_time,
                                    double epoch_seconds) {
    if (!(epoch_seconds > 0.0)) throw ContractViolation("checkpoint_level_time: epoch must be positive");
    return std::floor(born_time / epoch_seconds) > std::floor(parent_born_time / epoch_seconds)
               ? parent_level + 1
               : parent_level;
}

Block make_child(const Block& parent, BlockId id, NodeId proposer, double born_time,
                 const ProtocolParams& params) {
    Block b;
    b.id = id;
    b.parent = parent.id;
    b.height = parent.height + 1;
    b.proposer = proposer;
    b.born_time = born_time;
    b.cp_level = params.cp_mode == CheckpointMode::height
                     ? checkpoint_level(parent.cp_level, b.height, params.epoch_len)
                     : checkpoint_level_time(parent.cp_level, parent.born_time, born_time,
                                             params.epoch_len * params.block_interval);
    b.cp_hash = b.cp_level != parent.cp_level ? id : parent.cp_hash;
    return b;
}

double branch_score(BlockId tip, const BlockStore& store, const ReputationTable& rep, std::uint32_t tail_len) {
    double score = 0.0;
    const Block* b = &store.get(tip);
    for (std::uint32_t i = 0; i < tail_len; ++i) {
        score += std::log1p(std::max(0.0, rep.get(b->proposer)));
        if (!b->parent) break;
        b = &store.get(*b->parent);
    }
    return score;
}

bool fork_prefers(BlockId a, BlockId b, const BlockStore& store, const ReputationTable& rep,
                  std::uint32_t tail_len) {
    if (a == b) return false;
    const Block& x = store.get(a);
    const Block& y = store.get(b);
    if (x.cp_level != y.cp_level) return x.cp_level > y.cp_level;
    if (x.height != y.height) return x.height > y.height;
    const double sx = branch_score(a, store, rep, tail_len);
    const double sy = branch_score(b, store, rep, tail_len);
    if (sx != sy) return sx > sy;
    return a < b;
}

bool detect_equivocation(NodeId proposer, std::uint32_t height, BlockId new_id, EquivocationLog& log,
                         ReputationTable& rep, RecentWindow& window) {
    auto [it, inserted] = log.try_emplace({proposer, height}, new_id);
    if (inserted || it->second == new_id) return false;
    rep.penalize(proposer, kEquivocationPenalty);
    window.push_equivocation();
    return true;
}

double inconsistency_snapshot(double forktop, double reorg_recent, double equiv_recent, LogBase base) {
    if (forktop < 0.0 || reorg_recent < 0.0 || equiv_recent < 0.0)
        throw ContractViolation("inconsistency_snapshot: inputs must be non-negative");
    auto lg = [base](double x) { return base == LogBase::natural ? std::log(x) : std::log10(x); };
    return 1.2 * lg(1.0 + forktop) + 0.7 * std::sqrt(reorg_recent) + 0.9 * lg(1.0 + equiv_recent);
}

double update_ema(double prev, double snapshot, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractViolation("update_ema: alpha must lie in [0, 1]");
    return alpha * prev + (1.0 - alpha) * snapshot;
}

QuarantineState update_quarantine(QuarantineState qs, double ema, const ProtocolParams& params) {
    qs.ema = ema;
    if (!qs.quarantined) {
        if (ema > params.t_on) {
            qs.quarantined = true;
            qs.off_streak = 0;
        }
        return qs;
    }
    if (ema < params.t_off) {
        if (++qs.off_streak >= params.off_streak) {
            qs.quarantined = false;
            qs.off_streak = 0;
        }
    } else {
        qs.off_streak = 0;
    }
    return qs;
}

BlockId maybe_switch_head(BlockId current, BlockId candidate, bool quarantined, const BlockStore& store,
                          const ReputationTable& rep, std::uint32_t tail_len, double margin) {
    if (!quarantined || candidate == current) return candidate;
    const Block& cur = store.get(current);
    const Block& cand = store.get(candidate);
    if (cand.cp_level != cur.cp_level) return cand.cp_level > cur.cp_level ? candidate : current;
    if (cand.height != cur.height) return cand.height >= cur.height + 1 ? candidate : current;
    const double s_cand = branch_score(candidate, store, rep, tail_len);
    const double s_cur = branch_score(current, store, rep, tail_len);
    return s_cand > s_cur + margin ? candidate : current;
}

std::uint32_t forktop(const BlockStore& store) {
    std::uint32_t best = 0;
    std::uint32_t count = 0;
    for (BlockId t : store.tips()) {
        const std::uint32_t h = store.get(t).height;
        if (count == 0 || h > best) {
            best = h;
            count = 1;
        } else if (h == best) {
            ++count;
        }
    }
    return count;
}

std::uint32_t reorg_magnitude(const BlockStore& store, BlockId old_head, BlockId new_head) {
    const BlockId lca = store.common_ancestor(old_head, new_head);
    return store.get(old_head).height - store.get(lca).height;
}

namespace {

// Acceptance steps for a block whose parent is stored.
void accept(NodeState& node, const Block& b, const ProtocolParams& params) {
    const bool equivocated = detect_equivocation(b.proposer, b.height, b.id, node.equivocation_log,
                                                 node.reputation, node.window);
    if (equivocated) ++node.counters.equivocations;

    node.store.insert(b);
    ++node.counters.accepted;

    const std::uint32_t ft = forktop(node.store);
    node.counters.max_forktop = std::max(node.counters.max_forktop, ft);
    const double snap = inconsistency_snapshot(ft, node.window.reorg_recent(), node.window.equiv_recent(),
                                               params.log_base);
    const double ema = update_ema(node.quarantine.ema, snap, params.alpha);
    if (params.quarantine_enabled) {
        node.quarantine = update_quarantine(node.quarantine, ema, params);
    } else {
        node.quarantine.ema = ema;
    }

    const BlockId candidate = fork_choice(node.store.tips(), node.store, node.reputation, params.tail_len);
    const BlockId next = node.quarantine.quarantined
                             ? maybe_switch_head(node.head, candidate, true, node.store, node.reputation,
                                                 params.tail_len, params.score_margin)
                             : candidate;
    if (next != node.head) {
        const std::uint32_t mag = reorg_magnitude(node.store, node.head, next);
        node.window.push_reorg(mag);
        ++node.counters.head_changes;
        if (mag > 0) ++node.counters.reorgs;
        node.head = next;
    }

    if (!equivocated) node.reputation.reward(b.proposer, kProposerReward);
}

}  // namespace

BlockOutcome on_block(NodeState& node, const Block& b, const ProtocolParams& params) {
    if (node.store.knows(b.id)) {
        ++node.counters.duplicates;
        return BlockOutcome::duplicate;
    }
    if (!b.parent) {
        ++node.counters.malformed;
        return BlockOutcome::malformed;
    }
    const Block* parent = node.store.find(*b.parent);
    if (parent == nullptr) {
        node.store.add_orphan(b);
        ++node.counters.orphaned;
        return BlockOutcome::orphaned;
    }
    if (b.height != parent->height + 1) {
        ++node.counters.malformed;
        return BlockOutcome::malformed;
    }

    accept(node, b, params);
    // Drain orphans unblocked by b, breadth-first.
    std::deque<BlockId> ready{b.id};
    while (!ready.empty()) {
        const BlockId parent_id = ready.front();
        ready.pop_front();
        const std::uint32_t parent_height = node.store.get(parent_id).height;
        for (const Block& o : node.store.take_orphans(parent_id)) {
            if (o.height != parent_height + 1) {
                ++node.counters.malformed;
                continue;
            }
            accept(node, o, params);
            ready.push_back(o.id);
        }
    }
    return BlockOutcome::accepted;
}

}  // namespace ctxchain
