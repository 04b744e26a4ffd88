// One complete simulation run: engine + network + ledger nodes + gossip +
// convergence metrics, with the optional proof-of-context observer.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctxchain/ledger.hpp"
#include "ctxchain/metrics.hpp"
#include "ctxchain/poc.hpp"
#include "ctxchain/scenario.hpp"

namespace ctxchain {

struct RunResult {
    RunSummary summary;
    std::vector<PocSummary> poc;      // one per configured budget
    std::vector<BlockId> final_heads;  // indexed by node id
    std::uint64_t blocks_proposed = 0;
    std::uint64_t broadcast_delivered = 0;
    // Cross-group broadcast deliveries of blocks sent inside the partition window.
    std::uint64_t cross_group_deliveries_in_partition = 0;
};

// A run that threw; carries the seed for replay.
class RunFailure : public std::runtime_error {
public:
    RunFailure(std::uint64_t seed, const std::string& what)
        : std::runtime_error("seed " + std::to_string(seed) + ": " + what), seed_(seed) {}
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

// Validates cfg (ConfigError) and executes one run (RunFailure on a handler error).
RunResult run_one(const ScenarioConfig& cfg, std::uint64_t seed);

// run_one with a single attacker budget observing the run.
PocSummary poc_run(ScenarioConfig cfg, std::uint32_t budget, std::uint64_t seed);

}  // namespace ctxchain
