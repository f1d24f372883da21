#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmp/orchestrator.hpp"

using namespace cmp;
using config::RunConfig;
using train::IterationRecord;
using train::TrainState;

namespace {

// cheap settings for loop-shape tests
RunConfig tiny_config() {
    RunConfig cfg;
    cfg.env = env::EnvName::quadratic_bandit;
    cfg.iterations = 3;
    cfg.exploration_steps = 20;
    cfg.eval_steps = 10;
    cfg.exploit_update_times = 3;
    cfg.explore_update_times = 2;
    cfg.metaq_update_times = 2;
    cfg.batch_size = 8;
    cfg.hidden_sizes = {16, 16};
    cfg.buffer_capacity = 500;
    return cfg;
}

}  // namespace

TEST_CASE("compute_meta_reward is the performance difference") {
    CHECK(train::compute_meta_reward(10.0, 4.0) == 6.0);
    CHECK(train::compute_meta_reward(3.7, 3.7) == 0.0);
    CHECK(train::compute_meta_reward(-100.0, -150.0) == 50.0);
}

TEST_CASE("init: seeds the buffer with the first evaluation") {
    const RunConfig cfg = tiny_config();
    TrainState state = train::init_train(cfg, 5);
    CHECK(state.buffer.size() == static_cast<size_t>(cfg.eval_steps));
    CHECK(state.buffer.insertions() == static_cast<uint64_t>(cfg.eval_steps));
    CHECK(state.iteration == 0);
    CHECK(!state.memory.valid);
    CHECK(state.env_steps == cfg.eval_steps);
    CHECK(std::isfinite(state.perf_estimate));
}

TEST_CASE("init: identical config and seed give identical states") {
    const RunConfig cfg = tiny_config();
    TrainState a = train::init_train(cfg, 17);
    TrainState b = train::init_train(cfg, 17);
    CHECK(a.exploit.actor.params == b.exploit.actor.params);
    CHECK(a.exploit.critic.params == b.exploit.critic.params);
    CHECK(a.explore.mean.params == b.explore.mean.params);
    CHECK(a.metaq.net.params == b.metaq.net.params);
    CHECK(a.perf_estimate == b.perf_estimate);
    REQUIRE(a.buffer.size() == b.buffer.size());
    for (size_t k = 0; k < a.buffer.size(); ++k) {
        CHECK(a.buffer.at(k).s == b.buffer.at(k).s);
        CHECK(a.buffer.at(k).r == b.buffer.at(k).r);
    }
}

TEST_CASE("run_iteration: env-step accounting and buffer growth") {
    const RunConfig cfg = tiny_config();
    TrainState state = train::init_train(cfg, 3);
    const long per_iteration = cfg.exploration_steps + 2L * cfg.eval_steps;
    for (int i = 0; i < 3; ++i) {
        const IterationRecord record = train::run_iteration(state);
        CHECK(record.iteration == i);
        CHECK(record.env_steps == cfg.eval_steps + (i + 1) * per_iteration);
        // only the exploration and provisional-eval trajectories enter the buffer
        CHECK(state.buffer.insertions() ==
              static_cast<uint64_t>(cfg.eval_steps +
                                    (i + 1) * (cfg.exploration_steps + cfg.eval_steps)));
    }
}

TEST_CASE("run_iteration: meta reward is recomputable from the record") {
    const RunConfig cfg = tiny_config();
    TrainState state = train::init_train(cfg, 11);
    double previous_perf = state.perf_estimate;
    for (int i = 0; i < 3; ++i) {
        const IterationRecord record = train::run_iteration(state);
        CHECK(record.meta_reward ==
              record.eval_return_provisional - previous_perf);
        previous_perf = record.eval_return;
    }
}

TEST_CASE("run_iteration: iteration 0 skips meta updates, later ones run them") {
    const RunConfig cfg = tiny_config();
    TrainState state = train::init_train(cfg, 7);
    const IterationRecord first = train::run_iteration(state);
    CHECK(!first.advantage.has_value());
    CHECK(!first.metaq_loss.has_value());
    CHECK(!first.explore_loss.has_value());
    CHECK(first.log_std_mean.has_value());
    CHECK(state.memory.valid);

    const IterationRecord second = train::run_iteration(state);
    CHECK(second.advantage.has_value());
    CHECK(second.metaq_loss.has_value());
    CHECK(second.explore_loss.has_value());
    CHECK(second.cv_gain.has_value());
    CHECK(second.cv_cost.has_value());
    CHECK(second.immediate_gap.has_value());
}

TEST_CASE("run_iteration: zero update-times leave every network unchanged") {
    RunConfig cfg = tiny_config();
    cfg.exploit_update_times = 0;
    cfg.explore_update_times = 0;
    cfg.metaq_update_times = 0;
    TrainState state = train::init_train(cfg, 9);
    const auto actor = state.exploit.actor.params;
    const auto critic = state.exploit.critic.params;
    const auto mean = state.explore.mean.params;
    const auto metaq = state.metaq.net.params;
    const IterationRecord record = train::run_iteration(state);
    CHECK(state.exploit.actor.params == actor);
    CHECK(state.exploit.critic.params == critic);
    CHECK(state.explore.mean.params == mean);
    CHECK(state.metaq.net.params == metaq);
    CHECK(std::isfinite(record.meta_reward));
    CHECK(std::isfinite(record.eval_return));
}

TEST_CASE("ddpg baseline: zero meta-network computations, meta columns absent") {
    RunConfig cfg = tiny_config();
    cfg.algo = config::Algo::ddpg;
    TrainState state = train::init_train(cfg, 13);
    for (int i = 0; i < 2; ++i) {
        const IterationRecord record = train::run_iteration(state);
        CHECK(!record.cv_gain.has_value());
        CHECK(!record.cv_cost.has_value());
        CHECK(!record.advantage.has_value());
        CHECK(!record.metaq_loss.has_value());
        CHECK(!record.explore_loss.has_value());
        CHECK(!record.log_std_mean.has_value());
    }
    CHECK(state.meta_op_count == 0);
    CHECK(!state.memory.valid);
}

TEST_CASE("ma2c: the exploration update consumes the meta gain term only") {
    RunConfig cfg = tiny_config();
    cfg.algo = config::Algo::ma2c;
    cfg.beta = 0.0;  // gain column then equals the meta gain term
    TrainState state = train::init_train(cfg, 15);
    train::run_iteration(state);
    const IterationRecord record = train::run_iteration(state);
    REQUIRE(record.advantage.has_value());
    REQUIRE(record.cv_gain.has_value());
    CHECK(*record.advantage == *record.cv_gain);
    CHECK(state.meta_op_count > 0);
}

TEST_CASE("train: produces one record per iteration and streams them in order") {
    RunConfig cfg = tiny_config();
    cfg.iterations = 1;
    CHECK(train::train(cfg, 1).size() == 1);

    cfg.iterations = 4;
    std::vector<long> streamed;
    const auto records = train::train(cfg, 2, [&streamed](const IterationRecord& r) {
        streamed.push_back(r.iteration);
    });
    CHECK(records.size() == 4);
    CHECK(streamed == std::vector<long>{0, 1, 2, 3});
}

TEST_CASE("train: identical config and seed give identical record sequences") {
    const RunConfig cfg = tiny_config();
    const auto a = train::train(cfg, 21);
    const auto b = train::train(cfg, 21);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].meta_reward == b[i].meta_reward);
        CHECK(a[i].eval_return == b[i].eval_return);
        CHECK(a[i].eval_return_provisional == b[i].eval_return_provisional);
        CHECK(a[i].advantage == b[i].advantage);
        CHECK(a[i].metaq_loss == b[i].metaq_loss);
        CHECK(a[i].explore_loss == b[i].explore_loss);
        CHECK(a[i].log_std_mean == b[i].log_std_mean);
    }
}

TEST_CASE("train: different seeds explore differently") {
    const RunConfig cfg = tiny_config();
    const auto a = train::train(cfg, 100);
    const auto b = train::train(cfg, 101);
    CHECK(a[0].eval_return != b[0].eval_return);
}

TEST_CASE("goal hits are tallied on the sparse environment") {
    RunConfig cfg = tiny_config();
    cfg.env = env::EnvName::sparse_point_mass;
    cfg.eval_steps = 120;  // one full episode plus slack
    TrainState state = train::init_train(cfg, 23);
    train::run_iteration(state);
    CHECK(state.goal_hits >= 0);  // no goal this early; the counter just exists
}
