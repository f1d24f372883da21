#pragma once

#include <string>
#include <vector>

namespace cmp::gradcheck {

constexpr double kTolerance = 1e-4;
constexpr double kFdEps = 1e-5;

struct CheckResult {
    std::string name;
    double max_rel_err = 0.0;

    bool passed() const { return max_rel_err < kTolerance; }
};

// Finite-difference verification of every trainable gradient path: the actor
// objective, the critic TD loss, the exploration log-probability objective,
// the meta value sum and the meta value loss.
std::vector<CheckResult> run_all(int seeds_per_check = 10);

// 0 when every check is under tolerance, 1 otherwise
int exit_code(const std::vector<CheckResult>& results);

}  // namespace cmp::gradcheck
