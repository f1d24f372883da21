#include "cmp/rl.hpp"

#include <stdexcept>
#include <utility>

namespace cmp::rl {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("replay buffer capacity must be positive");
    }
    slots_.reserve(std::min<size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (slots_.size() < capacity_) {
        slots_.push_back(std::move(t));
    } else {
        slots_[next_] = std::move(t);  // overwrite the oldest
    }
    next_ = (next_ + 1) % capacity_;
    ++insertions_;
}

const Transition& ReplayBuffer::at(size_t k) const {
    if (k >= slots_.size()) {
        throw std::out_of_range("replay buffer index out of range");
    }
    if (slots_.size() < capacity_) {
        return slots_[k];
    }
    return slots_[(next_ + k) % capacity_];
}

void buffer_union(ReplayBuffer& buffer, const Trajectory& traj) {
    for (const Transition& t : traj.steps) {
        buffer.push(t);
    }
}

std::vector<Transition> sample_batch(const ReplayBuffer& buffer, int n, Rng& rng) {
    if (buffer.size() == 0) {
        throw std::runtime_error("cannot sample from an empty replay buffer");
    }
    std::vector<Transition> batch;
    batch.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        batch.push_back(buffer.at(static_cast<size_t>(rng.uniform_int(static_cast<int>(buffer.size())))));
    }
    return batch;
}

Trajectory rollout(const env::EnvSpec& spec, const ActionFn& action_fn, int steps, Rng& rng) {
    if (steps < 0) {
        throw std::invalid_argument("rollout steps must be non-negative");
    }
    Trajectory traj;
    traj.steps.reserve(static_cast<size_t>(steps));
    if (steps == 0) {
        return traj;
    }

    auto [state, obs] = env::reset(spec, rng);
    for (int k = 0; k < steps; ++k) {
        ActionChoice choice = action_fn(obs);
        env::StepResult next = env::step(spec, state, choice.action);

        Transition t;
        t.s = obs;
        t.a = std::move(choice.action);
        t.r = next.reward;
        t.s2 = next.observation;
        t.done = next.done;
        t.log_prob = choice.log_prob;
        traj.steps.push_back(std::move(t));

        if (next.done) {
            auto fresh = env::reset(spec, rng);
            state = std::move(fresh.state);
            obs = std::move(fresh.observation);
        } else {
            state = std::move(next.state);
            obs = std::move(next.observation);
        }
    }
    return traj;
}

EvalResult evaluate_policy(const env::EnvSpec& spec, const ActorFn& actor, int eval_steps,
                           Rng& rng) {
    if (eval_steps < 1) {
        throw std::invalid_argument("eval_steps must be at least 1");
    }
    EvalResult result;
    result.traj = rollout(
        spec, [&actor](const Vec& obs) { return ActionChoice{actor(obs), std::nullopt}; },
        eval_steps, rng);

    double total = 0.0;
    double episode_return = 0.0;
    int completed = 0;
    for (const Transition& t : result.traj.steps) {
        episode_return += t.r;
        if (t.done) {
            total += episode_return;
            episode_return = 0.0;
            ++completed;
        }
    }
    if (completed == 0) {
        throw std::runtime_error(
            "evaluation finished zero episodes; increase eval_steps to cover at least one full "
            "episode (max episode length " +
            std::to_string(spec.max_episode_steps) + ")");
    }
    result.mean_return = total / completed;
    result.completed_episodes = completed;
    return result;
}

}  // namespace cmp::rl
