// Property battery behind `ctxchain check`. Every property compares library
// code against a small brute-force reference on generated inputs.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctxchain {

struct CheckResult {
    std::string name;
    bool passed = true;
    std::size_t cases = 0;
    std::string detail;  // first counterexample, empty on success
};

std::vector<CheckResult> run_selfcheck(std::uint64_t seed = 2024, std::size_t cases = 200);

}  // namespace ctxchain
