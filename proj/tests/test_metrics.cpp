#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxchain/engine.hpp"
#include "ctxchain/metrics.hpp"

using namespace ctxchain;

namespace {

ConvergenceDetector feed(ConvergenceDetector det, double from, double to, bool agree) {
    const std::vector<BlockId> same{BlockId{3}, BlockId{3}, BlockId{3}};
    const std::vector<BlockId> split{BlockId{3}, BlockId{4}, BlockId{3}};
    for (double t = from; t <= to; t += 1.0) det = observe(det, agree ? same : split, t);
    return det;
}

}  // namespace

TEST_CASE("convergence detector") {
    ConvergenceDetector det;
    det = feed(det, 2400, 2499, false);
    det = feed(det, 2500, 2530, true);
    REQUIRE(det.first_convergence);
    CHECK(*det.first_convergence == 2500.0);
    CHECK(*recovery_time(2400.0, det) == 100.0);

    ConvergenceDetector broken;
    broken = feed(broken, 100, 129, true);
    broken = feed(broken, 130, 130, false);
    CHECK_FALSE(broken.first_convergence);
    CHECK_FALSE(broken.agree_since);

    ConvergenceDetector never;
    never = feed(never, 0, 500, false);
    CHECK_FALSE(never.first_convergence);
    CHECK_FALSE(recovery_time(0.0, never));

    ConvergenceDetector at_rejoin;
    at_rejoin = feed(at_rejoin, 2400, 2430, true);
    CHECK(*recovery_time(2400.0, at_rejoin) == 0.0);

    ConvergenceDetector late;
    late.stamp = ConvergenceStamp::detection;
    late = feed(late, 2500, 2530, true);
    CHECK(*late.first_convergence == 2530.0);

    // The first convergence is sticky.
    det = feed(det, 2531, 2540, false);
    det = feed(det, 2541, 2600, true);
    CHECK(*det.first_convergence == 2500.0);
    det.reset();
    CHECK_FALSE(det.first_convergence);
}

TEST_CASE("percentile") {
    CHECK(percentile({0.0, 10.0}, 0.95) == doctest::Approx(9.5));
    CHECK(percentile({7.0}, 0.0) == 7.0);
    CHECK(percentile({7.0}, 0.95) == 7.0);
    CHECK(percentile({7.0}, 1.0) == 7.0);
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    std::reverse(v.begin(), v.end());
    CHECK(percentile(v, 0.95) == doctest::Approx(95.05));
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 1.0) == 100.0);
    CHECK_THROWS_AS(percentile({}, 0.5), ContractViolation);
    CHECK_THROWS_AS(percentile({1.0}, 1.5), ContractViolation);
}

TEST_CASE("percentile is monotone in p and p95 is at least the median") {
    RngStream rng(8, "percentile");
    for (int c = 0; c < 200; ++c) {
        std::vector<double> v(1 + rng.below(50));
        for (double& x : v) x = rng.uniform(0.0, 1000.0);
        double prev = -1.0;
        for (int k = 0; k <= 20; ++k) {
            const double q = percentile(v, k / 20.0);
            REQUIRE(q >= prev);
            prev = q;
        }
        REQUIRE(percentile(v, 0.95) >= percentile(v, 0.5));
    }
}

TEST_CASE("bytes estimate") {
    CHECK(bytes_estimate(0, 0, 256) == 0);
    CHECK(bytes_estimate(100, 20, 256) == 30720);
    CHECK(bytes_estimate(100, 20, 512) == 2 * bytes_estimate(100, 20, 256));
    CHECK_THROWS_AS(bytes_estimate(1, 1, 0), ContractViolation);
}

TEST_CASE("aggregate statistics") {
    std::vector<RunSummary> all(4);
    for (auto& s : all) {
        s.success_end = true;
        s.recovery_s = 100.0;
    }
    const auto a = aggregate(all);
    CHECK(a.success_rate == 1.0);
    CHECK(*a.recovery_mean_s == 100.0);
    CHECK(*a.recovery_p95_s == 100.0);
    CHECK(a.n_recovered == 4);

    std::vector<RunSummary> none(3);
    const auto b = aggregate(none);
    CHECK_FALSE(b.recovery_mean_s);
    CHECK_FALSE(b.recovery_p95_s);
    const auto row = aggregate_csv_row("CaseA_50_50_noisy", "NoQ", b, 0, 0);
    CHECK(row == "CaseA_50_50_noisy,NoQ,3,0.000,NA,NA,0.00,0.00,0.0,0.000,0,0");

    std::vector<RunSummary> two(2);
    two[0].success_end = true;
    two[0].pairs_used = 10;
    two[1].pairs_used = 20;
    const auto c = aggregate(two);
    CHECK(c.success_rate == 0.5);
    CHECK(c.gossip_pairs_mean == 15.0);
    CHECK(c.n_seeds == 2);
}

TEST_CASE("csv headers") {
    CHECK(aggregate_csv_header() ==
          "scenario,variant,n_seeds,success_end_rate,recovery_mean_s,recovery_p95_s,gossip_pairs_mean,"
          "gossip_blocks_mean,total_bytes_est_mean,runtime_mean_ms,base_seed,n_failed");
    RunSummary s;
    s.seed = 12;
    s.success_end = true;
    s.recovery_s = 31.5;
    s.pairs_used = 2352;
    CHECK(run_csv_row(s) == "12,1,31.500,2352,0,0,0,0,0.000");
}

TEST_CASE("same_outcome ignores wall time only") {
    RunSummary a;
    a.runtime_ms = 1.0;
    RunSummary b = a;
    b.runtime_ms = 2.0;
    CHECK(a.same_outcome(b));
    b.pairs_used = 1;
    CHECK_FALSE(a.same_outcome(b));
}
