#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cmp/env.hpp"
#include "cmp/rng.hpp"

namespace cmp::rl {

using Vec = std::vector<double>;

struct Transition {
    Vec s;
    Vec a;
    double r = 0.0;
    Vec s2;
    bool done = false;
    std::optional<double> log_prob;
};

enum class Source {
    explore,
    exploit,
};

struct Trajectory {
    std::vector<Transition> steps;
    Source source = Source::exploit;
    int iteration = 0;
    bool counterfactual = false;  // actions were relabeled; rewards no longer meaningful

    size_t size() const { return steps.size(); }
    bool empty() const { return steps.empty(); }
};

// Bounded FIFO of transitions; eviction is strictly oldest-first.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity);

    void push(Transition t);
    size_t size() const { return slots_.size(); }
    size_t capacity() const { return capacity_; }
    uint64_t insertions() const { return insertions_; }

    // k-th oldest element, k in [0, size)
    const Transition& at(size_t k) const;

  private:
    std::vector<Transition> slots_;
    size_t capacity_;
    size_t next_ = 0;  // slot that the next push overwrites once full
    uint64_t insertions_ = 0;
};

void buffer_union(ReplayBuffer& buffer, const Trajectory& traj);

// n uniform-with-replacement samples
std::vector<Transition> sample_batch(const ReplayBuffer& buffer, int n, Rng& rng);

struct ActionChoice {
    Vec action;
    std::optional<double> log_prob;
};
using ActionFn = std::function<ActionChoice(const Vec& obs)>;
using ActorFn = std::function<Vec(const Vec& obs)>;

// Collect exactly `steps` transitions, resetting automatically at episode
// boundaries (including one reset before the first step).
Trajectory rollout(const env::EnvSpec& spec, const ActionFn& action_fn, int steps, Rng& rng);

struct EvalResult {
    double mean_return = 0.0;  // mean undiscounted return over completed episodes
    int completed_episodes = 0;
    Trajectory traj;  // all transitions, including a trailing partial episode
};

// Deterministic evaluation: no exploration noise, fresh resets from `rng`.
EvalResult evaluate_policy(const env::EnvSpec& spec, const ActorFn& actor, int eval_steps,
                           Rng& rng);

}  // namespace cmp::rl
