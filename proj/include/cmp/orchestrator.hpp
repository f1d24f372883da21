#pragma once

#include <functional>
#include <optional>

#include "cmp/cmp_meta.hpp"
#include "cmp/config.hpp"
#include "cmp/ddpg.hpp"
#include "cmp/env.hpp"
#include "cmp/rl.hpp"

namespace cmp::train {

// Everything one training run owns. Runs sharing nothing are independent.
struct TrainState {
    config::RunConfig cfg;
    env::EnvSpec spec;
    ddpg::ExploitAgent exploit;
    meta::ExplorePolicy explore;
    meta::MetaQNet metaq;
    rl::ReplayBuffer buffer;
    meta::MetaMemory memory;
    double perf_estimate = 0.0;  // latest evaluation of the exploitation policy
    // Running mean of the advantage fed to the exploration updates. The raw
    // score-function update buries the advantage signal in advantage-scaled
    // noise; subtracting a control variate keeps the estimator usable.
    double advantage_baseline = 0.0;
    bool advantage_baseline_valid = false;
    long iteration = 0;
    long env_steps = 0;
    long goal_hits = 0;      // episodes ended by a positive terminal reward
    long meta_op_count = 0;  // meta-network computations (zero for the ddpg baseline)
    Rng rng_explore, rng_eval, rng_update;
};

struct IterationRecord {
    long iteration = 0;
    long env_steps = 0;
    double meta_reward = 0.0;
    double eval_return_provisional = 0.0;
    double eval_return = 0.0;
    std::optional<double> cv_gain;
    std::optional<double> cv_cost;
    std::optional<double> advantage;  // the value fed to the exploration update
    std::optional<double> metaq_loss;
    std::optional<double> explore_loss;
    std::optional<double> log_std_mean;
    std::optional<double> immediate_gap;  // mean unweighted Q-gap, for beta studies
    double wallclock_s = 0.0;
};

TrainState init_train(const config::RunConfig& cfg, uint64_t seed);

double compute_meta_reward(double perf_after, double perf_before);

IterationRecord run_iteration(TrainState& state);

// Invoked after each iteration; used for incremental CSV flushing.
using RecordSink = std::function<void(const IterationRecord&)>;

std::vector<IterationRecord> train(const config::RunConfig& cfg, uint64_t seed,
                                   const RecordSink& sink = nullptr);

// CSV schema shared by the run command and the tests.
std::vector<std::string> csv_header();
std::vector<std::string> csv_row(const IterationRecord& record, bool log_wallclock);

}  // namespace cmp::train
