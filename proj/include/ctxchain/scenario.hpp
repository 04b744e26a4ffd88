// Experiment conditions and the flat key=value configuration format.
//
//   # comment
//   N=20
//   regime=noisy
//   partition.ratio=80/20
//   variant=Both_1_16
//   protocol.cp_mode=time
//
// Keys are the ScenarioConfig field names with dotted namespaces. `regime` is
// applied before any `net.*` override regardless of line order.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxchain/gossip.hpp"
#include "ctxchain/ledger.hpp"
#include "ctxchain/metrics.hpp"
#include "ctxchain/netmodel.hpp"
#include "ctxchain/poc.hpp"

namespace ctxchain {

enum class Regime : std::uint8_t { clean, noisy };

struct PartitionConfig {
    bool enabled = true;
    double start = 1200.0;
    double end = 2400.0;
    std::string ratio = "50/50";
};

struct PocConfig {
    std::vector<std::uint32_t> budgets{1, 2, 4, 8, 16};
    double challenge_period = 10.0;
    MemoryModel memory;
};

struct ScenarioConfig {
    std::string scenario = "custom";
    std::size_t n_nodes = 20;
    double sim_time = 3600.0;
    double block_interval = 30.0;
    Regime regime = Regime::noisy;
    NetworkParams net = NetworkParams::noisy();
    PartitionConfig partition;
    SyncVariant variant;
    ProtocolParams protocol;
    double k_converge = 30.0;
    ConvergenceStamp stamp = ConvergenceStamp::onset;
    double metric_period = 1.0;
    double gossip_period = 1.0;
    bool count_lost_pairs = false;
    std::uint64_t per_block_bytes = 256;
    std::size_t seeds = 500;
    std::uint64_t base_seed = 0;
    std::optional<PocConfig> poc;

    void set_regime(Regime r);
    // Throws ConfigError naming the offending field.
    void validate() const;
    // Rejoin instant, or 0 when there is no partition.
    double rejoin_time() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const char* regime_name(Regime r);

// Applies one key=value setting; throws ConfigError for unknown keys or values.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {});

// Inverse of parse_config for the fields it covers.
std::string format_config(const ScenarioConfig& cfg);

}  // namespace ctxchain
