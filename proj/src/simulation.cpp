#include "ctxchain/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <optional>

#include "ctxchain/engine.hpp"
#include "ctxchain/gossip.hpp"
#include "ctxchain/netmodel.hpp"

namespace ctxchain {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          seed_(seed),
          propose_rng_(seed, "propose"),
          net_rng_(seed, "net"),
          gossip_rng_(seed, "gossip"),
          challenge_rng_(seed, "challenge") {
        protocol_ = cfg.protocol;
        protocol_.block_interval = cfg.block_interval;
        protocol_.quarantine_enabled = cfg.variant.quarantine_enabled();
        if (cfg.partition.enabled) {
            partition_ = PartitionSchedule::split(cfg.n_nodes, cfg.partition.ratio, cfg.partition.start,
                                                  cfg.partition.end);
        }
        nodes_.reserve(cfg.n_nodes);
        for (std::size_t i = 0; i < cfg.n_nodes; ++i) nodes_.push_back(make_node(static_cast<NodeId>(i), protocol_));
        blocks_.push_back(make_genesis());
        detector_.k = cfg.k_converge;
        detector_.stamp = cfg.stamp;
        heads_.resize(cfg.n_nodes, kGenesisId);
        if (cfg.poc) poc_.emplace(cfg.poc->budgets, cfg.poc->memory, cfg.rejoin_time());
    }

    RunResult run() {
        engine_.schedule(next_proposal_time(0.0, cfg_.block_interval, propose_rng_), ProposeEvent{});
        engine_.schedule(cfg_.gossip_period, GossipTickEvent{});
        engine_.schedule(0.0, MetricTickEvent{});
        if (cfg_.poc) engine_.schedule(cfg_.poc->challenge_period, ChallengeTickEvent{});

        engine_.run_until(cfg_.sim_time, [this](const SimEvent& ev) { dispatch(ev); });
        maybe_rejoin(cfg_.sim_time);
        observe_heads(cfg_.sim_time);

        RunResult out;
        RunSummary& s = out.summary;
        s.seed = seed_;
        s.success_end = std::all_of(heads_.begin(), heads_.end(), [&](BlockId h) { return h == heads_.front(); });
        if (rejoined_) s.recovery_s = recovery_time(cfg_.rejoin_time(), detector_);
        s.pairs_used = gossip_.pairs_used;
        s.blocks_transferred = gossip_.blocks_transferred;
        s.bytes_est = bytes_estimate(broadcast_delivered_, gossip_.blocks_transferred, cfg_.per_block_bytes);
        for (const NodeState& n : nodes_) {
            s.max_forktop_seen = std::max(s.max_forktop_seen, n.counters.max_forktop);
            s.reorg_count += n.counters.reorgs;
        }
        if (poc_) out.poc = poc_->finish();
        out.final_heads = heads_;
        out.blocks_proposed = blocks_.size() - 1;
        out.broadcast_delivered = broadcast_delivered_;
        out.cross_group_deliveries_in_partition = cross_group_in_partition_;
        return out;
    }

private:
    const PartitionSchedule* partition() const { return partition_ ? &*partition_ : nullptr; }

    // Starts the recovery observation phase the first time the clock reaches rejoin.
    void maybe_rejoin(double now) {
        if (rejoined_ || now < cfg_.rejoin_time()) return;
        rejoined_ = true;
        detector_.reset();
        detector_ = observe(detector_, heads_, cfg_.rejoin_time());
    }

    void observe_heads(double now) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) heads_[i] = nodes_[i].head;
        detector_ = observe(detector_, heads_, now);
    }

    void dispatch(const SimEvent& ev) {
        maybe_rejoin(ev.time);
        const double now = ev.time;
        std::visit(overloaded{
                       [&](const ProposeEvent&) { propose(now); },
                       [&](const DeliverEvent& d) { deliver(d); },
                       [&](const GossipTickEvent&) {
                           gossip_tick(nodes_, now, cfg_.variant, cfg_.net, partition(), protocol_, gossip_,
                                       gossip_rng_, GossipOptions{cfg_.count_lost_pairs});
                           schedule_if_within(now + cfg_.gossip_period, GossipTickEvent{});
                       },
                       [&](const MetricTickEvent&) {
                           schedule_if_within(now + cfg_.metric_period, MetricTickEvent{});
                       },
                       [&](const ChallengeTickEvent&) {
                           poc_->on_challenge(nodes_, now, challenge_rng_);
                           schedule_if_within(now + cfg_.poc->challenge_period, ChallengeTickEvent{});
                       },
                   },
                   ev.kind);
        if (!std::holds_alternative<ChallengeTickEvent>(ev.kind)) observe_heads(now);
    }

    void schedule_if_within(double t, EventKind kind) {
        if (t <= cfg_.sim_time) engine_.schedule(t, std::move(kind));
    }

    void propose(double now) {
        const auto p = static_cast<NodeId>(propose_rng_.below(nodes_.size()));
        NodeState& proposer = nodes_[p];
        const Block& parent = proposer.store.get(proposer.head);
        const Block b = make_child(parent, BlockId{blocks_.size()}, p, now, protocol_);
        blocks_.push_back(b);
        on_block(proposer, b, protocol_);
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (j == p) continue;
            const auto to = static_cast<NodeId>(j);
            if (auto at = try_send(p, to, now, cfg_.net, partition(), net_rng_)) {
                engine_.schedule(*at, DeliverEvent{b.id, to});
            }
        }
        engine_.schedule(next_proposal_time(now, cfg_.block_interval, propose_rng_), ProposeEvent{});
    }

    void deliver(const DeliverEvent& d) {
        const Block& b = blocks_.at(d.block.value);
        // Broadcasts leave at born_time; messages already in flight at the split may still land.
        if (partition_ && is_partitioned(b.born_time, *partition_) &&
            partition_->assignment[b.proposer] != partition_->assignment[d.to]) {
            ++cross_group_in_partition_;
        }
        ++broadcast_delivered_;
        on_block(nodes_[d.to], b, protocol_);
    }

    const ScenarioConfig& cfg_;
    std::uint64_t seed_;
    ProtocolParams protocol_;
    std::optional<PartitionSchedule> partition_;
    Engine engine_;
    RngStream propose_rng_;
    RngStream net_rng_;
    RngStream gossip_rng_;
    RngStream challenge_rng_;
    std::vector<NodeState> nodes_;
    std::vector<Block> blocks_;  // every block ever proposed, indexed by id
    std::vector<BlockId> heads_;
    ConvergenceDetector detector_;
    bool rejoined_ = false;
    GossipCounters gossip_;
    std::uint64_t broadcast_delivered_ = 0;
    std::uint64_t cross_group_in_partition_ = 0;
    std::optional<PocObserver> poc_;
};

}  // namespace

RunResult run_one(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    try {
        Simulation sim(cfg, seed);
        r = sim.run();
    } catch (const std::exception& e) {
        throw RunFailure(seed, e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    r.summary.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return r;
}

PocSummary poc_run(ScenarioConfig cfg, std::uint32_t budget, std::uint64_t seed) {
    if (!cfg.poc) cfg.poc.emplace();
    cfg.poc->budgets = {budget};
    return run_one(cfg, seed).poc.front();
}

}  // namespace ctxchain
