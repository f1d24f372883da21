#pragma once

// Gradient-computation halves of the update operations, split out so the
// finite-difference suite can verify exactly the code the optimizers consume.

#include <span>

#include "cmp/cmp_meta.hpp"
#include "cmp/ddpg.hpp"

namespace cmp::ddpg {

// Mean-squared TD error against fixed targets; accumulates dLoss/dCritic.
double critic_loss_grads(const ExploitAgent& agent, std::span<const rl::Transition> batch,
                         std::span<const double> targets, nn::GradBundle& grads);

// Loss -mean Q(s, pi(s)); accumulates dLoss/dActor.
double actor_objective_grads(const ExploitAgent& agent, std::span<const rl::Transition> batch,
                             nn::GradBundle& grads);

}  // namespace cmp::ddpg

namespace cmp::meta {

// Objective advantage * sum_t log pi_e(a_t|s_t); accumulates the ascent
// gradient into mean_grads / log_std_grads and returns the objective value.
double explore_objective_grads(const ExplorePolicy& policy, const rl::Trajectory& traj,
                               double advantage, nn::GradBundle& mean_grads,
                               std::vector<double>& log_std_grads);

// Meta value loss and its gradient for the online network.
double metaq_loss_grads(const MetaQNet& metaq, const MetaMemory& memory,
                        const rl::Trajectory& current, nn::GradBundle& grads);

}  // namespace cmp::meta
