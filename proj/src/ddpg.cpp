#include "cmp/ddpg.hpp"

#include <cmath>
#include <stdexcept>

#include "cmp/grads_detail.hpp"

namespace cmp::ddpg {

namespace {

Vec concat(const Vec& s, const Vec& a) {
    Vec sa;
    sa.reserve(s.size() + a.size());
    sa.insert(sa.end(), s.begin(), s.end());
    sa.insert(sa.end(), a.begin(), a.end());
    return sa;
}

void check_batch(std::span<const rl::Transition> batch) {
    if (batch.empty()) {
        throw std::invalid_argument("update called with an empty batch");
    }
}

}  // namespace

ExploitAgent make_agent(const env::EnvSpec& spec, const AgentConfig& config, Rng& rng) {
    ExploitAgent agent;

    nn::MlpConfig actor_cfg;
    actor_cfg.input_dim = spec.obs_dim;
    actor_cfg.hidden = config.hidden;
    actor_cfg.output_dim = spec.action_dim;
    actor_cfg.layer_norm = config.layer_norm;
    actor_cfg.squash = nn::Squash::tanh_bounds;
    actor_cfg.out_lo = spec.action_lo;
    actor_cfg.out_hi = spec.action_hi;
    actor_cfg.final_scale = 1e-3;  // small initial actions
    agent.actor = nn::make_mlp(actor_cfg, rng);

    nn::MlpConfig critic_cfg;
    critic_cfg.input_dim = spec.obs_dim + spec.action_dim;
    critic_cfg.hidden = config.hidden;
    critic_cfg.output_dim = 1;
    critic_cfg.layer_norm = config.layer_norm;
    agent.critic = nn::make_mlp(critic_cfg, rng);

    agent.target_actor = agent.actor;
    agent.target_critic = agent.critic;
    agent.actor_opt = nn::Adam(agent.actor.param_count());
    agent.critic_opt = nn::Adam(agent.critic.param_count());
    agent.gamma = config.gamma;
    agent.tau_soft = config.tau_soft;
    agent.actor_lr = config.actor_lr;
    agent.critic_lr = config.critic_lr;
    return agent;
}

std::vector<double> td_targets(const ExploitAgent& agent, std::span<const rl::Transition> batch) {
    std::vector<double> targets;
    targets.reserve(batch.size());
    for (const rl::Transition& t : batch) {
        double y = t.r;
        if (!t.done) {
            const Vec next_action = nn::mlp_forward(agent.target_actor, t.s2);
            y += agent.gamma * nn::mlp_forward(agent.target_critic, concat(t.s2, next_action))[0];
        }
        targets.push_back(y);
    }
    return targets;
}

double critic_loss_grads(const ExploitAgent& agent, std::span<const rl::Transition> batch,
                         std::span<const double> targets, nn::GradBundle& grads) {
    nn::ForwardTrace trace;
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        nn::mlp_forward_trace(agent.critic, concat(batch[i].s, batch[i].a), trace);
        const double err = trace.output()[0] - targets[i];
        loss += err * err * inv_n;
        const double upstream[1] = {2.0 * err * inv_n};
        nn::mlp_backward(agent.critic, trace, upstream, grads);
    }
    return loss;
}

double actor_objective_grads(const ExploitAgent& agent, std::span<const rl::Transition> batch,
                             nn::GradBundle& grads) {
    nn::GradBundle critic_grads = nn::make_grad_bundle(agent.critic);  // input grads only
    nn::ForwardTrace actor_trace, critic_trace;
    double mean_q = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const int obs_dim = agent.actor.input_dim();
    const int action_dim = agent.actor.output_dim();

    for (const rl::Transition& t : batch) {
        nn::mlp_forward_trace(agent.actor, t.s, actor_trace);
        const Vec& action = actor_trace.output();
        nn::mlp_forward_trace(agent.critic, concat(t.s, action), critic_trace);
        mean_q += critic_trace.output()[0] * inv_n;

        // L = -mean Q; push dL/dQ through the critic to get dL/da
        critic_grads.clear();
        const double upstream[1] = {-inv_n};
        nn::mlp_backward(agent.critic, critic_trace, upstream, critic_grads);
        std::span<const double> d_action(critic_grads.input.data() + obs_dim,
                                         static_cast<size_t>(action_dim));
        nn::mlp_backward(agent.actor, actor_trace, d_action, grads);
    }
    return -mean_q;
}

double critic_update(ExploitAgent& agent, std::span<const rl::Transition> batch) {
    check_batch(batch);
    const std::vector<double> targets = td_targets(agent, batch);
    nn::GradBundle grads = nn::make_grad_bundle(agent.critic);
    const double loss = critic_loss_grads(agent, batch, targets, grads);
    if (!std::isfinite(loss)) {
        throw std::runtime_error("critic TD loss is not finite");
    }
    agent.critic_opt.step(agent.critic.params, grads.params, agent.critic_lr);
    return loss;
}

double actor_update(ExploitAgent& agent, std::span<const rl::Transition> batch) {
    check_batch(batch);
    nn::GradBundle grads = nn::make_grad_bundle(agent.actor);
    const double loss = actor_objective_grads(agent, batch, grads);
    if (!std::isfinite(loss)) {
        throw std::runtime_error("actor loss is not finite");
    }
    agent.actor_opt.step(agent.actor.params, grads.params, agent.actor_lr);
    return loss;
}

void soft_update(nn::Mlp& target, const nn::Mlp& online, double tau_soft) {
    if (target.params.size() != online.params.size()) {
        throw std::invalid_argument("soft_update: parameter shape mismatch");
    }
    for (size_t i = 0; i < target.params.size(); ++i) {
        target.params[i] = (1.0 - tau_soft) * target.params[i] + tau_soft * online.params[i];
    }
}

Vec gaussian_noise_action(const ExploitAgent& agent, const Vec& obs, double sigma,
                          const env::EnvSpec& spec, Rng& rng) {
    if (sigma < 0.0) {
        throw std::invalid_argument("noise sigma must be non-negative");
    }
    Vec action = nn::mlp_forward(agent.actor, obs);
    for (int d = 0; d < spec.action_dim; ++d) {
        const double half_range = 0.5 * (spec.action_hi[d] - spec.action_lo[d]);
        action[d] += sigma * half_range * rng.normal();
        action[d] = std::min(spec.action_hi[d], std::max(spec.action_lo[d], action[d]));
    }
    return action;
}

double tabular_q_update(double q, double r, double gamma, double max_q_next, double alpha) {
    return (1.0 - alpha) * q + alpha * (r + gamma * max_q_next);
}

}  // namespace cmp::ddpg
