// Message delay, jitter, drop and the hard A/B partition window.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctxchain/engine.hpp"
#include "ctxchain/types.hpp"

namespace ctxchain {

struct NetworkParams {
    double drop_prob = 0.0;
    double delay_mean = 0.25;
    double delay_jitter = 0.10;

    static NetworkParams clean() { return {0.00, 0.25, 0.10}; }
    static NetworkParams noisy() { return {0.02, 0.80, 0.20}; }

    void validate() const;
};

// Lower bound on any delivered delay, in seconds.
inline constexpr double kMinDelay = 1e-3;

enum class Group : std::uint8_t { A, B };

struct PartitionSchedule {
    double start = 1200.0;
    double end = 2400.0;
    std::vector<Group> assignment;  // indexed by node id
    std::string ratio_label = "50/50";

    // Nodes [0, |A|) go to A where |A| = round(N * a / (a + b)) for label "a/b".
    static PartitionSchedule split(std::size_t n_nodes, const std::string& ratio_label,
                                   double start = 1200.0, double end = 2400.0);

    std::size_t group_size(Group g) const;
    void validate(std::size_t n_nodes) const;
};

// Window is [start, end): partitioned at start, rejoined at end.
bool is_partitioned(double now, const PartitionSchedule& part);

// Returns the delivery time, or nothing if the message is dropped or blocked by
// the partition. Consumes exactly two draws from rng on every call.
std::optional<double> try_send(NodeId from, NodeId to, double now, const NetworkParams& params,
                               const PartitionSchedule* part, RngStream& rng);

}  // namespace ctxchain
