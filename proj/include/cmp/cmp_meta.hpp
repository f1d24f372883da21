#pragma once

#include <span>

#include "cmp/ddpg.hpp"
#include "cmp/env.hpp"
#include "cmp/nn.hpp"
#include "cmp/rl.hpp"
#include "cmp/rng.hpp"

namespace cmp::meta {

using Vec = std::vector<double>;

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

// Gaussian exploration policy: a mean network with the same squashed
// architecture as the exploitation actor, plus one global log-std per action
// dimension. The log-std vector is optimized jointly with the mean network.
//
// Updates use plain clipped gradient ascent rather than Adam: the advantage
// magnitude carries the whole learning signal here, and a scale-invariant
// optimizer erases it (when the advantage keeps one sign, Adam reduces the
// update to a skewed score-function random walk that inflates the standard
// deviation no matter what the advantage says).
struct ExplorePolicy {
    nn::Mlp mean;
    Vec log_std;
    Vec action_lo, action_hi;
    double lr = 1e-4;
    double grad_clip = 1000.0;        // safety cap on the update L2 norm
    bool normalize_advantage = true;  // divide the advantage by |trajectory|

    double log_std_mean() const;
};

struct ExploreConfig {
    std::vector<int> hidden = {64, 64};
    bool layer_norm = true;
    double log_std_init = -0.7;
    double lr = 1e-4;
    double grad_clip = 1000.0;
    bool normalize_advantage = true;
};

ExplorePolicy make_explore_policy(const env::EnvSpec& spec, const ExploreConfig& config, Rng& rng);

struct ExploreSample {
    Vec action;       // clipped to bounds
    Vec pre_clip;     // the raw Gaussian sample; the unbiased score target
    double log_prob;  // diagonal-Gaussian density of the pre-clip action
};

// action = clip(mean(obs) + exp(log_std) * z) for the given standard-normal z.
ExploreSample explore_action_from_noise(const ExplorePolicy& policy, const Vec& obs, const Vec& z);
ExploreSample sample_explore_action(const ExplorePolicy& policy, const Vec& obs, Rng& rng);

// log pi_e(a | s) under the current parameters
double explore_logp(const ExplorePolicy& policy, const Vec& s, const Vec& a);

// Meta value network over (state, action) pairs plus its soft-updated target.
struct MetaQNet {
    nn::Mlp net;
    nn::Mlp target;
    nn::Adam opt;
    double gamma_meta = 0.9;
    double lr = 1e-3;
};

struct MetaQConfig {
    std::vector<int> hidden = {64, 64};
    bool layer_norm = true;
    double gamma_meta = 0.9;
    double lr = 1e-3;
};

MetaQNet make_metaq(const env::EnvSpec& spec, const MetaQConfig& config, Rng& rng);

// Per-iteration carryover: the trajectory and meta-reward that the next
// meta value update regresses against.
struct MetaMemory {
    rl::Trajectory prev_traj;
    double prev_meta_reward = 0.0;
    double prev_metaq_sum = 0.0;  // online-net sum at store time (diagnostic)
    bool valid = false;           // false at iteration 0
};

// Gain / cost decomposition of one exploration trajectory. advantage is
// constructed as gain - cost so the identity holds bitwise.
struct CvReport {
    double gain = 0.0;
    double cost = 0.0;
    double advantage = 0.0;
    double meta_gain = 0.0;        // meta value of the trajectory as collected
    double meta_cost = 0.0;        // meta value after relabeling with the actor
    double beta_immediate = 0.0;   // beta * (sum_q_explore - sum_q_exploit)
    double sum_q_explore = 0.0;    // critic value of the actions taken
    double sum_q_exploit = 0.0;    // critic value of the actor's actions
    double immediate_gap = 0.0;    // sum_q_explore - sum_q_exploit (unweighted)
};

// Replace every action with actor(s); states, ordering and length preserved.
rl::Trajectory counterfactual_relabel(const rl::Trajectory& traj, const rl::ActorFn& actor);

// Sum of the meta value over the trajectory's (state, action) pairs.
double traj_meta_q(const MetaQNet& metaq, std::span<const rl::Transition> pairs, bool use_target);

CvReport counterfactual_value(const ddpg::ExploitAgent& exploit, const ExplorePolicy& explore,
                              const MetaQNet& metaq, const rl::Trajectory& traj, double beta);

// Squared-gap objective for the meta value network: current trajectory sum
// regressed toward (previous sum - previous meta reward) / gamma_meta.
struct MetaQLossTerms {
    double target = 0.0;
    double loss = 0.0;
};
MetaQLossTerms metaq_loss_terms(double current_sum, double prev_sum, double prev_meta_reward,
                                double gamma_meta);

// One Adam step on the meta value loss; the previous-trajectory sum comes
// from the target network and is treated as a constant. Returns the pre-step
// loss. The caller soft-updates the target afterwards.
double metaq_update(MetaQNet& metaq, const MetaMemory& memory, const rl::Trajectory& current);

// One clipped gradient-ascent step on advantage * sum_t log pi_e(a_t | s_t);
// returns the pre-step value of the negated objective. The advantage is
// divided by the trajectory length first when the policy is configured to
// normalize.
double explore_policy_update(ExplorePolicy& policy, const rl::Trajectory& traj, double advantage);

}  // namespace cmp::meta
