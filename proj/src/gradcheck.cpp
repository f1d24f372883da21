#include "cmp/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "cmp/grads_detail.hpp"

namespace cmp::gradcheck {

namespace {

using cmp::Rng;
using rl::Trajectory;
using rl::Transition;
using Vec = std::vector<double>;

Vec random_vec(int n, Rng& rng, double scale = 1.0) {
    Vec v(static_cast<size_t>(n));
    for (double& x : v) x = scale * rng.normal();
    return v;
}

std::vector<Transition> random_batch(const env::EnvSpec& spec, int n, Rng& rng) {
    std::vector<Transition> batch(static_cast<size_t>(n));
    for (Transition& t : batch) {
        t.s = random_vec(spec.obs_dim, rng);
        t.a.resize(static_cast<size_t>(spec.action_dim));
        for (int d = 0; d < spec.action_dim; ++d) {
            t.a[d] = rng.uniform(spec.action_lo[d], spec.action_hi[d]);
        }
        t.r = rng.normal();
        t.s2 = random_vec(spec.obs_dim, rng);
        t.done = rng.uniform01() < 0.25;
    }
    return batch;
}

Trajectory random_traj(const env::EnvSpec& spec, int n, Rng& rng) {
    Trajectory traj;
    traj.source = rl::Source::explore;
    traj.steps = random_batch(spec, n, rng);
    return traj;
}

Vec concat_grads(const Vec& a, const Vec& b) {
    Vec out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

double check_actor(uint64_t seed) {
    Rng rng(seed);
    const env::EnvSpec spec = env::make_spec(env::EnvName::pendulum);
    ddpg::ExploitAgent agent = ddpg::make_agent(spec, {}, rng);
    const std::vector<Transition> batch = random_batch(spec, 4, rng);

    nn::GradBundle analytic = nn::make_grad_bundle(agent.actor);
    ddpg::actor_objective_grads(agent, batch, analytic);

    const Vec fd = nn::finite_diff_grad(
        [&](const nn::Mlp& actor) {
            double mean_q = 0.0;
            for (const Transition& t : batch) {
                Vec action = nn::mlp_forward(actor, t.s);
                Vec sa = t.s;
                sa.insert(sa.end(), action.begin(), action.end());
                mean_q += nn::mlp_forward(agent.critic, sa)[0];
            }
            return -mean_q / static_cast<double>(batch.size());
        },
        agent.actor, kFdEps);
    return nn::max_rel_err(analytic.params, fd);
}

double check_critic(uint64_t seed) {
    Rng rng(seed);
    const env::EnvSpec spec = env::make_spec(env::EnvName::pendulum);
    ddpg::ExploitAgent agent = ddpg::make_agent(spec, {}, rng);
    const std::vector<Transition> batch = random_batch(spec, 4, rng);
    const std::vector<double> targets = ddpg::td_targets(agent, batch);

    nn::GradBundle analytic = nn::make_grad_bundle(agent.critic);
    ddpg::critic_loss_grads(agent, batch, targets, analytic);

    const Vec fd = nn::finite_diff_grad(
        [&](const nn::Mlp& critic) {
            double loss = 0.0;
            for (size_t i = 0; i < batch.size(); ++i) {
                Vec sa = batch[i].s;
                sa.insert(sa.end(), batch[i].a.begin(), batch[i].a.end());
                const double err = nn::mlp_forward(critic, sa)[0] - targets[i];
                loss += err * err;
            }
            return loss / static_cast<double>(batch.size());
        },
        agent.critic, kFdEps);
    return nn::max_rel_err(analytic.params, fd);
}

double check_explore_logprob(uint64_t seed) {
    Rng rng(seed);
    const env::EnvSpec spec = env::make_spec(env::EnvName::pendulum);
    meta::ExplorePolicy policy = meta::make_explore_policy(spec, {}, rng);
    const Trajectory traj = random_traj(spec, 6, rng);
    const double advantage = 0.8;

    nn::GradBundle mean_grads = nn::make_grad_bundle(policy.mean);
    Vec log_std_grads(policy.log_std.size(), 0.0);
    meta::explore_objective_grads(policy, traj, advantage, mean_grads, log_std_grads);
    const Vec analytic = concat_grads(mean_grads.params, log_std_grads);

    auto objective = [&](const meta::ExplorePolicy& p) {
        double logp_sum = 0.0;
        for (const Transition& t : traj.steps) {
            logp_sum += meta::explore_logp(p, t.s, t.a);
        }
        return advantage * logp_sum;
    };
    const Vec fd_mean = nn::finite_diff_grad(
        [&](const nn::Mlp&) { return objective(policy); }, policy.mean, kFdEps);
    const Vec fd_log_std = nn::finite_diff_grad_vec(
        [&](const Vec&) { return objective(policy); }, policy.log_std, kFdEps);
    return nn::max_rel_err(analytic, concat_grads(fd_mean, fd_log_std));
}

double check_metaq_sum(uint64_t seed) {
    Rng rng(seed);
    const env::EnvSpec spec = env::make_spec(env::EnvName::pendulum);
    meta::MetaQNet metaq = meta::make_metaq(spec, {}, rng);
    const Trajectory traj = random_traj(spec, 6, rng);

    nn::GradBundle analytic = nn::make_grad_bundle(metaq.net);
    nn::ForwardTrace trace;
    const double upstream[1] = {1.0};
    for (const Transition& t : traj.steps) {
        Vec sa = t.s;
        sa.insert(sa.end(), t.a.begin(), t.a.end());
        nn::mlp_forward_trace(metaq.net, sa, trace);
        nn::mlp_backward(metaq.net, trace, upstream, analytic);
    }

    const Vec fd = nn::finite_diff_grad(
        [&](const nn::Mlp& net) {
            double total = 0.0;
            for (const Transition& t : traj.steps) {
                Vec sa = t.s;
                sa.insert(sa.end(), t.a.begin(), t.a.end());
                total += nn::mlp_forward(net, sa)[0];
            }
            return total;
        },
        metaq.net, kFdEps);
    return nn::max_rel_err(analytic.params, fd);
}

double check_metaq_loss(uint64_t seed) {
    Rng rng(seed);
    const env::EnvSpec spec = env::make_spec(env::EnvName::pendulum);
    meta::MetaQNet metaq = meta::make_metaq(spec, {}, rng);
    meta::MetaMemory memory;
    memory.prev_traj = random_traj(spec, 6, rng);
    memory.prev_meta_reward = rng.normal();
    memory.valid = true;
    const Trajectory current = random_traj(spec, 6, rng);

    nn::GradBundle analytic = nn::make_grad_bundle(metaq.net);
    meta::metaq_loss_grads(metaq, memory, current, analytic);

    const Vec fd = nn::finite_diff_grad(
        [&](const nn::Mlp& net) {
            double current_sum = 0.0;
            for (const Transition& t : current.steps) {
                Vec sa = t.s;
                sa.insert(sa.end(), t.a.begin(), t.a.end());
                current_sum += nn::mlp_forward(net, sa)[0];
            }
            const double prev_sum =
                meta::traj_meta_q(metaq, memory.prev_traj.steps, /*use_target=*/true);
            return meta::metaq_loss_terms(current_sum, prev_sum, memory.prev_meta_reward,
                                          metaq.gamma_meta)
                .loss;
        },
        metaq.net, kFdEps);
    return nn::max_rel_err(analytic.params, fd);
}

}  // namespace

std::vector<CheckResult> run_all(int seeds_per_check) {
    const struct {
        const char* name;
        double (*check)(uint64_t);
    } checks[] = {
        {"actor", check_actor},
        {"critic", check_critic},
        {"explore-logprob", check_explore_logprob},
        {"metaq-sum", check_metaq_sum},
        {"metaq-loss", check_metaq_loss},
    };

    std::vector<CheckResult> results;
    uint64_t seed = 7001;
    for (const auto& check : checks) {
        CheckResult result;
        result.name = check.name;
        for (int k = 0; k < seeds_per_check; ++k) {
            result.max_rel_err = std::max(result.max_rel_err, check.check(seed++));
        }
        results.push_back(result);
    }
    return results;
}

int exit_code(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.passed(); })
               ? 0
               : 1;
}

}  // namespace cmp::gradcheck
