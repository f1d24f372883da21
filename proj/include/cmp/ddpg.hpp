#pragma once

#include <span>

#include "cmp/env.hpp"
#include "cmp/nn.hpp"
#include "cmp/rl.hpp"
#include "cmp/rng.hpp"

namespace cmp::ddpg {

using Vec = std::vector<double>;

// Deterministic actor, critic over the concatenated (state, action) input,
// and their slowly tracking target copies.
struct ExploitAgent {
    nn::Mlp actor;
    nn::Mlp critic;
    nn::Mlp target_actor;
    nn::Mlp target_critic;
    nn::Adam actor_opt;
    nn::Adam critic_opt;
    double gamma = 0.99;
    double tau_soft = 0.005;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;

    Vec act(const Vec& obs) const { return nn::mlp_forward(actor, obs); }
};

struct AgentConfig {
    std::vector<int> hidden = {64, 64};
    bool layer_norm = true;
    double gamma = 0.99;
    double tau_soft = 0.005;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
};

ExploitAgent make_agent(const env::EnvSpec& spec, const AgentConfig& config, Rng& rng);

// y = r + gamma * (1 - done) * Q_target(s', pi_target(s'))
std::vector<double> td_targets(const ExploitAgent& agent, std::span<const rl::Transition> batch);

// One Adam step on the mean-squared TD error; returns the pre-step loss.
double critic_update(ExploitAgent& agent, std::span<const rl::Transition> batch);

// One Adam step ascending mean Q(s, pi(s)); returns -mean Q before the step.
double actor_update(ExploitAgent& agent, std::span<const rl::Transition> batch);

// target <- (1 - tau) * target + tau * online, elementwise
void soft_update(nn::Mlp& target, const nn::Mlp& online, double tau_soft);

// clip(pi(obs) + N(0, sigma^2 * half_range^2), bounds); sigma is expressed in
// action half-range units.
Vec gaussian_noise_action(const ExploitAgent& agent, const Vec& obs, double sigma,
                          const env::EnvSpec& spec, Rng& rng);

// Scalar Q-learning update rule; the continuous-control critic realizes the
// same target with the max over next actions supplied by the target actor.
double tabular_q_update(double q, double r, double gamma, double max_q_next, double alpha);

}  // namespace cmp::ddpg
