#include "ctxchain/engine.hpp"

#include <cmath>
#include <string>

namespace ctxchain {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a; stable across platforms unlike std::hash<std::string>.
std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view purpose)
    : key_(splitmix64(splitmix64(seed) ^ hash_label(purpose))) {}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t x = key_ + 0x9e3779b97f4a7c15ULL * (counter_ + 1);
    ++counter_;
    return splitmix64(x ^ (key_ >> 17));
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw ContractViolation("RngStream::below: n must be positive");
    // Lemire's multiply-shift with rejection for exact uniformity.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::exponential(double mean) {
    // 1 - u lies in (0, 1], so the log is finite.
    double d = -std::log(1.0 - uniform()) * mean;
    while (d <= 0.0) d = -std::log(1.0 - uniform()) * mean;
    return d;
}

bool RngStream::bernoulli(double p) {
    return uniform() < p;
}

void EventQueue::push(SimEvent ev) {
    heap_.push(std::move(ev));
}

SimEvent EventQueue::pop() {
    SimEvent ev = heap_.top();
    heap_.pop();
    return ev;
}

std::uint64_t Engine::schedule(double time, EventKind kind) {
    if (!(time >= now_)) {
        throw ContractViolation("Engine::schedule: event at t=" + std::to_string(time) +
                                " is before the clock t=" + std::to_string(now_));
    }
    const std::uint64_t seq = next_seq_++;
    queue_.push(SimEvent{time, seq, std::move(kind)});
    return seq;
}

void Engine::run_until(double end_time, const Handler& handler) {
    while (!queue_.empty() && queue_.top().time <= end_time) {
        SimEvent ev = queue_.pop();
        now_ = ev.time;
        ++dispatched_;
        handler(ev);
    }
    if (end_time > now_) now_ = end_time;
}

double next_proposal_time(double now, double block_interval, RngStream& rng) {
    if (!(block_interval > 0.0)) {
        throw ContractViolation("next_proposal_time: block_interval must be positive");
    }
    double t = now + rng.exponential(block_interval);
    while (!(t > now)) t = now + rng.exponential(block_interval);
    return t;
}

}  // namespace ctxchain
