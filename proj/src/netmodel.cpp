#include "ctxchain/netmodel.hpp"

#include <algorithm>
#include <cmath>

namespace ctxchain {

void NetworkParams::validate() const {
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0))
        throw ContractViolation("network.drop_prob must lie in [0, 1]");
    if (!(delay_mean >= 0.0)) throw ContractViolation("network.delay_mean must be >= 0");
    if (!(delay_jitter >= 0.0)) throw ContractViolation("network.delay_jitter must be >= 0");
}

PartitionSchedule PartitionSchedule::split(std::size_t n_nodes, const std::string& ratio_label,
                                           double start, double end) {
    const auto slash = ratio_label.find('/');
    if (slash == std::string::npos)
        throw ContractViolation("partition ratio must look like \"a/b\", got \"" + ratio_label + "\"");
    double a = 0.0;
    double b = 0.0;
    try {
        a = std::stod(ratio_label.substr(0, slash));
        b = std::stod(ratio_label.substr(slash + 1));
    } catch (const std::exception&) {
        throw ContractViolation("partition ratio must look like \"a/b\", got \"" + ratio_label + "\"");
    }
    if (!(a >= 0.0 && b >= 0.0 && a + b > 0.0))
        throw ContractViolation("partition ratio parts must be non-negative: " + ratio_label);

    const auto size_a = static_cast<std::size_t>(std::llround(static_cast<double>(n_nodes) * a / (a + b)));
    PartitionSchedule part;
    part.start = start;
    part.end = end;
    part.ratio_label = ratio_label;
    part.assignment.assign(n_nodes, Group::B);
    std::fill_n(part.assignment.begin(), std::min(size_a, n_nodes), Group::A);
    return part;
}

std::size_t PartitionSchedule::group_size(Group g) const {
    return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), g));
}

void PartitionSchedule::validate(std::size_t n_nodes) const {
    if (!(start < end)) throw ContractViolation("partition.start must be < partition.end");
    if (assignment.size() != n_nodes)
        throw ContractViolation("partition assignment must cover every node exactly once");
    if (group_size(Group::A) == 0 || group_size(Group::B) == 0)
        throw ContractViolation("partition ratio " + ratio_label + " leaves a group empty");
}

bool is_partitioned(double now, const PartitionSchedule& part) {
    return now >= part.start && now < part.end;
}

std::optional<double> try_send(NodeId from, NodeId to, double now, const NetworkParams& params,
                               const PartitionSchedule* part, RngStream& rng) {
    if (from == to) throw ContractViolation("try_send: from == to");
    const bool dropped = rng.uniform() < params.drop_prob;
    const double jitter = rng.uniform(-params.delay_jitter, params.delay_jitter);
    if (dropped) return std::nullopt;
    if (part != nullptr && is_partitioned(now, *part) &&
        part->assignment.at(from) != part->assignment.at(to)) {
        return std::nullopt;
    }
    return now + std::max(kMinDelay, params.delay_mean + jitter);
}

}  // namespace ctxchain
