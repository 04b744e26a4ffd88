// Convergence detection, recovery timing, per-run summaries and cross-seed
// aggregation.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxchain/types.hpp"

namespace ctxchain {

enum class ConvergenceStamp : std::uint8_t {
    onset,      // start of the sustained agreement window
    detection,  // instant the window reached K seconds
};

struct ConvergenceDetector {
    double k = 30.0;
    ConvergenceStamp stamp = ConvergenceStamp::onset;
    std::optional<double> agree_since;
    std::optional<double> first_convergence;

    // Starts a fresh observation phase (used at rejoin).
    void reset();
};

// Call on the metric grid and after every head-changing event.
ConvergenceDetector observe(ConvergenceDetector det, std::span<const BlockId> heads, double now);

std::optional<double> recovery_time(double rejoin, const ConvergenceDetector& det);

// Sorted linear interpolation at rank p * (n - 1).
double percentile(std::vector<double> values, double p);

std::uint64_t bytes_estimate(std::uint64_t blocks_broadcast_delivered, std::uint64_t blocks_gossiped,
                             std::uint64_t per_block_bytes);

struct RunSummary {
    std::uint64_t seed = 0;
    bool success_end = false;
    std::optional<double> recovery_s;
    std::uint64_t pairs_used = 0;
    std::uint64_t blocks_transferred = 0;
    std::uint64_t bytes_est = 0;
    std::uint32_t max_forktop_seen = 0;
    std::uint64_t reorg_count = 0;
    double runtime_ms = 0.0;

    // Everything except wall time.
    bool same_outcome(const RunSummary& other) const;
};

struct AggregateStats {
    std::size_t n_seeds = 0;
    double success_rate = 0.0;
    std::size_t n_recovered = 0;
    std::optional<double> recovery_mean_s;
    std::optional<double> recovery_p95_s;
    double gossip_pairs_mean = 0.0;
    double blocks_transferred_mean = 0.0;
    double total_bytes_est_mean = 0.0;
    double runtime_mean_ms = 0.0;
};

// Order-insensitive accumulator: merging partial batches and finishing gives the
// same bits as aggregating the concatenation.
class SummaryAccumulator {
public:
    void add(const RunSummary& s);
    void merge(const SummaryAccumulator& other);
    AggregateStats finish() const;
    std::size_t count() const { return n_; }

private:
    std::size_t n_ = 0;
    std::size_t successes_ = 0;
    std::uint64_t pairs_ = 0;
    std::uint64_t blocks_ = 0;
    std::uint64_t bytes_ = 0;
    std::vector<double> recoveries_;
    std::vector<double> runtimes_;
};

AggregateStats aggregate(std::span<const RunSummary> summaries);

// CSV for aggregate rows (one per scenario/variant).
std::string aggregate_csv_header();
std::string aggregate_csv_row(const std::string& scenario, const std::string& variant, const AggregateStats& s,
                              std::uint64_t base_seed, std::size_t n_failed);

// CSV for per-seed rows.
std::string run_csv_header();
std::string run_csv_row(const RunSummary& s);

}  // namespace ctxchain
