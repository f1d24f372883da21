#include "cmp/orchestrator.hpp"

#include <chrono>
#include <cmath>

#include "cmp/csv.hpp"

namespace cmp::train {

namespace {

void run_updater(ddpg::ExploitAgent& agent, rl::ReplayBuffer& source, int times, int batch_size,
                 Rng& rng) {
    for (int i = 0; i < times; ++i) {
        const std::vector<rl::Transition> batch = rl::sample_batch(source, batch_size, rng);
        ddpg::critic_update(agent, batch);
        ddpg::actor_update(agent, batch);
        ddpg::soft_update(agent.target_actor, agent.actor, agent.tau_soft);
        ddpg::soft_update(agent.target_critic, agent.critic, agent.tau_soft);
    }
}

long count_goal_hits(const rl::Trajectory& traj) {
    long hits = 0;
    for (const rl::Transition& t : traj.steps) {
        if (t.done && t.r > 0.5) ++hits;
    }
    return hits;
}

void check_finite(double value, const char* what, long iteration) {
    if (!std::isfinite(value)) {
        throw std::runtime_error("iteration " + std::to_string(iteration) + ": " + what +
                                 " is not finite; aborting the run");
    }
}

}  // namespace

TrainState init_train(const config::RunConfig& cfg, uint64_t seed) {
    config::validate(cfg);

    TrainState state{
        .cfg = cfg,
        .spec = env::make_spec(cfg.env),
        .exploit = {},
        .explore = {},
        .metaq = {},
        .buffer = rl::ReplayBuffer(static_cast<size_t>(cfg.buffer_capacity)),
        .memory = {},
        .rng_explore = Rng(derive_stream_seed(seed, Stream::exploration)),
        .rng_eval = Rng(derive_stream_seed(seed, Stream::evaluation)),
        .rng_update = Rng(derive_stream_seed(seed, Stream::update)),
    };

    Rng rng_init(derive_stream_seed(seed, Stream::init));

    ddpg::AgentConfig agent_cfg;
    agent_cfg.hidden = cfg.hidden_sizes;
    agent_cfg.layer_norm = cfg.layer_norm;
    agent_cfg.gamma = cfg.gamma;
    agent_cfg.tau_soft = cfg.tau_soft;
    agent_cfg.actor_lr = cfg.actor_lr;
    agent_cfg.critic_lr = cfg.critic_lr;
    state.exploit = ddpg::make_agent(state.spec, agent_cfg, rng_init);

    meta::ExploreConfig explore_cfg;
    explore_cfg.hidden = cfg.hidden_sizes;
    explore_cfg.layer_norm = cfg.layer_norm;
    explore_cfg.log_std_init = cfg.log_std_init;
    explore_cfg.lr = cfg.explore_lr;
    explore_cfg.grad_clip = cfg.explore_grad_clip;
    explore_cfg.normalize_advantage = cfg.advantage_norm;
    state.explore = meta::make_explore_policy(state.spec, explore_cfg, rng_init);

    meta::MetaQConfig metaq_cfg;
    metaq_cfg.hidden = cfg.hidden_sizes;
    metaq_cfg.layer_norm = cfg.layer_norm;
    metaq_cfg.gamma_meta = cfg.gamma_meta;
    metaq_cfg.lr = cfg.metaq_lr;
    state.metaq = meta::make_metaq(state.spec, metaq_cfg, rng_init);

    // initial evaluation with the untrained policy seeds both the performance
    // estimate and the replay buffer
    const rl::ActorFn actor = [&state](const rl::Vec& obs) { return state.exploit.act(obs); };
    rl::EvalResult initial = rl::evaluate_policy(state.spec, actor, cfg.eval_steps, state.rng_eval);
    initial.traj.source = rl::Source::exploit;
    state.perf_estimate = initial.mean_return;
    state.goal_hits += count_goal_hits(initial.traj);
    rl::buffer_union(state.buffer, initial.traj);
    state.env_steps = cfg.eval_steps;
    return state;
}

double compute_meta_reward(double perf_after, double perf_before) {
    return perf_after - perf_before;
}

IterationRecord run_iteration(TrainState& state) {
    const auto started = std::chrono::steady_clock::now();
    const config::RunConfig& cfg = state.cfg;
    const bool uses_meta = cfg.algo != config::Algo::ddpg;
    IterationRecord record;
    record.iteration = state.iteration;

    // (1) exploration trajectory
    rl::ActionFn explore_fn;
    if (uses_meta) {
        explore_fn = [&state](const rl::Vec& obs) {
            meta::ExploreSample sample =
                meta::sample_explore_action(state.explore, obs, state.rng_explore);
            // record the raw Gaussian sample; the environment clips on
            // execution, and the score function stays unbiased
            return rl::ActionChoice{std::move(sample.pre_clip), sample.log_prob};
        };
    } else {
        explore_fn = [&state, &cfg](const rl::Vec& obs) {
            return rl::ActionChoice{
                ddpg::gaussian_noise_action(state.exploit, obs, cfg.noise_sigma, state.spec,
                                            state.rng_explore),
                std::nullopt};
        };
    }
    rl::Trajectory exploration =
        rl::rollout(state.spec, explore_fn, cfg.exploration_steps, state.rng_explore);
    exploration.source = rl::Source::explore;
    exploration.iteration = static_cast<int>(state.iteration);
    state.goal_hits += count_goal_hits(exploration);

    // (2) provisional update on the exploration trajectory only
    rl::ReplayBuffer provisional(exploration.steps.size());
    rl::buffer_union(provisional, exploration);
    run_updater(state.exploit, provisional, cfg.exploit_update_times, cfg.batch_size,
                state.rng_update);

    // (3) evaluate the provisionally updated policy
    const rl::ActorFn actor = [&state](const rl::Vec& obs) { return state.exploit.act(obs); };
    rl::EvalResult provisional_eval =
        rl::evaluate_policy(state.spec, actor, cfg.eval_steps, state.rng_eval);
    provisional_eval.traj.source = rl::Source::exploit;
    provisional_eval.traj.iteration = static_cast<int>(state.iteration);
    state.goal_hits += count_goal_hits(provisional_eval.traj);
    record.eval_return_provisional = provisional_eval.mean_return;

    // (4) meta reward
    const double meta_reward =
        compute_meta_reward(provisional_eval.mean_return, state.perf_estimate);
    record.meta_reward = meta_reward;
    check_finite(meta_reward, "meta reward", state.iteration);

    // (5) meta updates; skipped at iteration 0 while the memory is invalid
    if (uses_meta && state.memory.valid && cfg.explore_update_times > 0) {
        double metaq_loss_total = 0.0;
        long metaq_updates = 0;
        double explore_loss_total = 0.0;
        double gain_total = 0.0, cost_total = 0.0, advantage_total = 0.0, gap_total = 0.0;
        for (int e = 0; e < cfg.explore_update_times; ++e) {
            for (int m = 0; m < cfg.metaq_update_times; ++m) {
                metaq_loss_total += meta::metaq_update(state.metaq, state.memory, exploration);
                ddpg::soft_update(state.metaq.target, state.metaq.net, cfg.tau_soft);
                ++metaq_updates;
                ++state.meta_op_count;
            }
            const meta::CvReport report = meta::counterfactual_value(
                state.exploit, state.explore, state.metaq, exploration, cfg.beta);
            ++state.meta_op_count;
            const double advantage =
                cfg.algo == config::Algo::ma2c ? report.meta_gain : report.advantage;
            if (!state.advantage_baseline_valid) {
                state.advantage_baseline = advantage;
                state.advantage_baseline_valid = true;
            }
            const double centered = advantage - state.advantage_baseline;
            state.advantage_baseline = 0.9 * state.advantage_baseline + 0.1 * advantage;
            explore_loss_total += meta::explore_policy_update(state.explore, exploration,
                                                              centered);
            ++state.meta_op_count;
            gain_total += report.gain;
            cost_total += report.cost;
            advantage_total += advantage;
            gap_total += report.immediate_gap;
        }
        const double n_explore = static_cast<double>(cfg.explore_update_times);
        record.cv_gain = gain_total / n_explore;
        record.cv_cost = cost_total / n_explore;
        record.advantage = advantage_total / n_explore;
        record.immediate_gap = gap_total / n_explore;
        record.explore_loss = explore_loss_total / n_explore;
        if (metaq_updates > 0) {
            record.metaq_loss = metaq_loss_total / static_cast<double>(metaq_updates);
        }
        check_finite(*record.advantage, "advantage", state.iteration);
    }
    if (uses_meta) {
        record.log_std_mean = state.explore.log_std_mean();
    }

    // (6) grow the replay buffer with both new trajectories
    rl::buffer_union(state.buffer, exploration);
    rl::buffer_union(state.buffer, provisional_eval.traj);

    // (7) off-policy training on the full buffer, continuing from the
    // provisional policy
    run_updater(state.exploit, state.buffer, cfg.exploit_update_times, cfg.batch_size,
                state.rng_update);

    // (8) post-update evaluation becomes the next baseline performance
    rl::EvalResult final_eval =
        rl::evaluate_policy(state.spec, actor, cfg.eval_steps, state.rng_eval);
    state.goal_hits += count_goal_hits(final_eval.traj);
    record.eval_return = final_eval.mean_return;
    check_finite(final_eval.mean_return, "evaluation return", state.iteration);
    state.perf_estimate = final_eval.mean_return;

    // (9) store the meta memory for the next iteration
    if (uses_meta) {
        state.memory.prev_traj = exploration;
        state.memory.prev_meta_reward = meta_reward;
        state.memory.prev_metaq_sum =
            meta::traj_meta_q(state.metaq, exploration.steps, /*use_target=*/false);
        ++state.meta_op_count;
        state.memory.valid = true;
    }

    state.env_steps += cfg.exploration_steps + 2L * cfg.eval_steps;
    record.env_steps = state.env_steps;
    ++state.iteration;

    record.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

std::vector<IterationRecord> train(const config::RunConfig& cfg, uint64_t seed,
                                   const RecordSink& sink) {
    TrainState state = init_train(cfg, seed);
    std::vector<IterationRecord> records;
    records.reserve(static_cast<size_t>(cfg.iterations));
    for (int i = 0; i < cfg.iterations; ++i) {
        records.push_back(run_iteration(state));
        if (sink) sink(records.back());
    }
    return records;
}

std::vector<std::string> csv_header() {
    return {"iteration",  "env_steps",   "meta_reward", "eval_return_provisional",
            "eval_return", "cv_gain",    "cv_cost",     "advantage",
            "metaq_loss",  "explore_loss", "log_std_mean", "wallclock_s"};
}

std::vector<std::string> csv_row(const IterationRecord& r, bool log_wallclock) {
    return {csv::format(r.iteration),
            csv::format(r.env_steps),
            csv::format(r.meta_reward),
            csv::format(r.eval_return_provisional),
            csv::format(r.eval_return),
            csv::na_or(r.cv_gain),
            csv::na_or(r.cv_cost),
            csv::na_or(r.advantage),
            csv::na_or(r.metaq_loss),
            csv::na_or(r.explore_loss),
            csv::na_or(r.log_std_mean),
            log_wallclock ? csv::format(r.wallclock_s) : std::string("NA")};
}

}  // namespace cmp::train
