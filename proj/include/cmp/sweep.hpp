#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmp/config.hpp"
#include "cmp/orchestrator.hpp"

namespace cmp::sweep {

// How many trailing evaluations define final performance.
constexpr int kFinalWindow = 10;

struct CellResult {
    std::string arm;
    uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double final_return = 0.0;  // mean of the last kFinalWindow eval returns
    std::string csv_path;
};

struct ArmSummary {
    std::string arm;
    config::Algo algo = config::Algo::cmp;
    double beta = 0.0;
    int n_seeds = 0;
    int n_failed = 0;
    double mean_final = 0.0;
    double std_final = 0.0;  // sample standard deviation over succeeding seeds
};

struct SweepResult {
    std::vector<CellResult> cells;
    std::vector<ArmSummary> summaries;
    std::string summary_path;
};

double final_performance(const std::vector<train::IterationRecord>& records);

// Runs the arms x seeds cross product; each cell writes its own run CSV under
// <out_dir>/<arm>/ and the summary lands in <out_dir>/sweep_summary.csv.
// Cell failures are recorded and the sweep continues.
SweepResult run_sweep(const config::RunConfig& base, const std::vector<std::string>& arms,
                      const std::vector<uint64_t>& seeds);

}  // namespace cmp::sweep
