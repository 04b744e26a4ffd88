// Deterministic event-driven clock for one simulation run.

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string_view>
#include <variant>
#include <vector>

#include "ctxchain/types.hpp"

namespace ctxchain {

// Counter-based random stream: value(draw) depends only on (seed, purpose, draw).
// Distributions are implemented here rather than through <random> so results do
// not depend on the standard library vendor.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view purpose);

    std::uint64_t next_u64();
    // Uniform on [0, 1).
    double uniform();
    // Uniform on [lo, hi).
    double uniform(double lo, double hi);
    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    // Exponential with the given mean; always > 0.
    double exponential(double mean);
    bool bernoulli(double p);

    std::uint64_t draws() const { return counter_; }
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct ProposeEvent {};
struct DeliverEvent {
    BlockId block;
    NodeId to;
};
struct GossipTickEvent {};
struct MetricTickEvent {};
struct ChallengeTickEvent {};

using EventKind = std::variant<ProposeEvent, DeliverEvent, GossipTickEvent, MetricTickEvent,
                               ChallengeTickEvent>;

struct SimEvent {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind;
};

// Min-heap on (time, seq).
class EventQueue {
public:
    void push(SimEvent ev);
    SimEvent pop();
    const SimEvent& top() const { return heap_.top(); }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
};

class Engine {
public:
    using Handler = std::function<void(const SimEvent&)>;

    double now() const { return now_; }

    // Assigns the next seq. Throws ContractViolation if time < now().
    std::uint64_t schedule(double time, EventKind kind);

    // Dispatches every event with time <= end_time in (time, seq) order, then
    // sets the clock to end_time.
    void run_until(double end_time, const Handler& handler);

    std::uint64_t dispatched() const { return dispatched_; }
    std::size_t pending() const { return queue_.size(); }

private:
    EventQueue queue_;
    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
};

// now + d with d ~ Exp(mean = block_interval).
double next_proposal_time(double now, double block_interval, RngStream& rng);

}  // namespace ctxchain
