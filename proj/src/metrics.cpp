#include "ctxchain/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace ctxchain {

void ConvergenceDetector::reset() {
    agree_since.reset();
    first_convergence.reset();
}

ConvergenceDetector observe(ConvergenceDetector det, std::span<const BlockId> heads, double now) {
    const bool agree = !heads.empty() && std::all_of(heads.begin(), heads.end(),
                                                     [&](BlockId h) { return h == heads.front(); });
    if (!agree) {
        det.agree_since.reset();
        return det;
    }
    if (!det.agree_since) det.agree_since = now;
    if (!det.first_convergence && now - *det.agree_since >= det.k) {
        det.first_convergence =
            det.stamp == ConvergenceStamp::onset ? *det.agree_since : *det.agree_since + det.k;
    }
    return det;
}

std::optional<double> recovery_time(double rejoin, const ConvergenceDetector& det) {
    if (!det.first_convergence) return std::nullopt;
    return *det.first_convergence - rejoin;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw ContractViolation("percentile: empty input");
    if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("percentile: p must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double rank = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values[lo];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::uint64_t bytes_estimate(std::uint64_t blocks_broadcast_delivered, std::uint64_t blocks_gossiped,
                             std::uint64_t per_block_bytes) {
    if (per_block_bytes == 0) throw ContractViolation("bytes_estimate: per_block_bytes must be positive");
    return (blocks_broadcast_delivered + blocks_gossiped) * per_block_bytes;
}

bool RunSummary::same_outcome(const RunSummary& o) const {
    return seed == o.seed && success_end == o.success_end && recovery_s == o.recovery_s &&
           pairs_used == o.pairs_used && blocks_transferred == o.blocks_transferred && bytes_est == o.bytes_est &&
           max_forktop_seen == o.max_forktop_seen && reorg_count == o.reorg_count;
}

void SummaryAccumulator::add(const RunSummary& s) {
    ++n_;
    if (s.success_end) ++successes_;
    pairs_ += s.pairs_used;
    blocks_ += s.blocks_transferred;
    bytes_ += s.bytes_est;
    if (s.recovery_s) recoveries_.push_back(*s.recovery_s);
    runtimes_.push_back(s.runtime_ms);
}

void SummaryAccumulator::merge(const SummaryAccumulator& o) {
    n_ += o.n_;
    successes_ += o.successes_;
    pairs_ += o.pairs_;
    blocks_ += o.blocks_;
    bytes_ += o.bytes_;
    recoveries_.insert(recoveries_.end(), o.recoveries_.begin(), o.recoveries_.end());
    runtimes_.insert(runtimes_.end(), o.runtimes_.begin(), o.runtimes_.end());
}

namespace {

// Sums in sorted order so the result does not depend on arrival order.
double sorted_mean(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

AggregateStats SummaryAccumulator::finish() const {
    if (n_ == 0) throw ContractViolation("aggregate: no summaries");
    const auto n = static_cast<double>(n_);
    AggregateStats a;
    a.n_seeds = n_;
    a.success_rate = static_cast<double>(successes_) / n;
    a.n_recovered = recoveries_.size();
    if (!recoveries_.empty()) {
        a.recovery_mean_s = sorted_mean(recoveries_);
        a.recovery_p95_s = percentile(recoveries_, 0.95);
    }
    a.gossip_pairs_mean = static_cast<double>(pairs_) / n;
    a.blocks_transferred_mean = static_cast<double>(blocks_) / n;
    a.total_bytes_est_mean = static_cast<double>(bytes_) / n;
    a.runtime_mean_ms = sorted_mean(runtimes_);
    return a;
}

AggregateStats aggregate(std::span<const RunSummary> summaries) {
    SummaryAccumulator acc;
    for (const auto& s : summaries) acc.add(s);
    return acc.finish();
}

namespace {

std::string opt_fixed(const std::optional<double>& v, int decimals) {
    return v ? fmt::format("{:.{}f}", *v, decimals) : std::string("NA");
}

}  // namespace

std::string aggregate_csv_header() {
    return "scenario,variant,n_seeds,success_end_rate,recovery_mean_s,recovery_p95_s,gossip_pairs_mean,"
           "gossip_blocks_mean,total_bytes_est_mean,runtime_mean_ms,base_seed,n_failed";
}

std::string aggregate_csv_row(const std::string& scenario, const std::string& variant, const AggregateStats& s,
                              std::uint64_t base_seed, std::size_t n_failed) {
    return fmt::format("{},{},{},{:.3f},{},{},{:.2f},{:.2f},{:.1f},{:.3f},{},{}", scenario, variant, s.n_seeds,
                       s.success_rate, opt_fixed(s.recovery_mean_s, 3), opt_fixed(s.recovery_p95_s, 2),
                       s.gossip_pairs_mean, s.blocks_transferred_mean, s.total_bytes_est_mean, s.runtime_mean_ms,
                       base_seed, n_failed);
}

std::string run_csv_header() {
    return "seed,success_end,recovery_s,pairs_used,blocks_transferred,bytes_est,max_forktop_seen,reorg_count,"
           "runtime_ms";
}

std::string run_csv_row(const RunSummary& s) {
    return fmt::format("{},{},{},{},{},{},{},{},{:.3f}", s.seed, s.success_end ? 1 : 0, opt_fixed(s.recovery_s, 3),
                       s.pairs_used, s.blocks_transferred, s.bytes_est, s.max_forktop_seen, s.reorg_count,
                       s.runtime_ms);
}

}  // namespace ctxchain
