#pragma once

#include <string>
#include <vector>

#include "cmp/rng.hpp"

namespace cmp::env {

using Vec = std::vector<double>;

enum class EnvName {
    pendulum,
    sparse_point_mass,
    quadratic_bandit,
};

EnvName env_from_string(const std::string& name);
std::string to_string(EnvName name);

struct EnvSpec {
    EnvName name = EnvName::pendulum;
    int obs_dim = 0;
    int action_dim = 0;
    Vec action_lo, action_hi;  // per-dim bounds
    int max_episode_steps = 0;
};

EnvSpec make_spec(EnvName name);

// Value-semantics environment state; step() is a pure function of
// (spec, state, action) so repeated calls agree bit for bit.
struct EnvState {
    Vec internal;          // environment-specific
    int elapsed_steps = 0;
    long clip_count = 0;   // out-of-bounds actions clipped so far (diagnostic)
};

struct ResetResult {
    EnvState state;
    Vec observation;
};

struct StepResult {
    EnvState state;
    Vec observation;
    double reward = 0.0;
    bool done = false;
};

ResetResult reset(const EnvSpec& spec, Rng& rng);
StepResult step(const EnvSpec& spec, const EnvState& state, const Vec& action);

}  // namespace cmp::env
