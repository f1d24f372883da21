#include "cmp/env.hpp"

#include <cmath>
#include <stdexcept>

namespace cmp::env {

namespace {

// pendulum constants
constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kDt = 0.05;
constexpr double kMaxSpeed = 8.0;
constexpr double kMaxTorque = 2.0;
constexpr int kPendulumSteps = 200;

// sparse point mass constants
constexpr double kMoveScale = 0.05;
constexpr double kGoalX = 0.8;
constexpr double kGoalY = 0.8;
constexpr double kGoalRadius = 0.1;
constexpr int kPointMassSteps = 100;

double clip(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

// wrap angle to [-pi, pi)
double wrap_angle(double theta) {
    double y = std::fmod(theta + M_PI, 2.0 * M_PI);
    if (y < 0.0) y += 2.0 * M_PI;
    return y - M_PI;
}

Vec pendulum_obs(const EnvState& state) {
    return {std::cos(state.internal[0]), std::sin(state.internal[0]), state.internal[1]};
}

}  // namespace

EnvName env_from_string(const std::string& name) {
    if (name == "pendulum") return EnvName::pendulum;
    if (name == "sparse-point-mass") return EnvName::sparse_point_mass;
    if (name == "quadratic-bandit") return EnvName::quadratic_bandit;
    throw std::invalid_argument("unknown env '" + name +
                                "' (expected pendulum, sparse-point-mass or quadratic-bandit)");
}

std::string to_string(EnvName name) {
    switch (name) {
        case EnvName::pendulum: return "pendulum";
        case EnvName::sparse_point_mass: return "sparse-point-mass";
        case EnvName::quadratic_bandit: return "quadratic-bandit";
    }
    return "?";
}

EnvSpec make_spec(EnvName name) {
    EnvSpec spec;
    spec.name = name;
    switch (name) {
        case EnvName::pendulum:
            spec.obs_dim = 3;
            spec.action_dim = 1;
            spec.action_lo = {-kMaxTorque};
            spec.action_hi = {kMaxTorque};
            spec.max_episode_steps = kPendulumSteps;
            break;
        case EnvName::sparse_point_mass:
            spec.obs_dim = 2;
            spec.action_dim = 2;
            spec.action_lo = {-1.0, -1.0};
            spec.action_hi = {1.0, 1.0};
            spec.max_episode_steps = kPointMassSteps;
            break;
        case EnvName::quadratic_bandit:
            spec.obs_dim = 1;
            spec.action_dim = 1;
            spec.action_lo = {-1.0};
            spec.action_hi = {1.0};
            spec.max_episode_steps = 1;
            break;
    }
    return spec;
}

ResetResult reset(const EnvSpec& spec, Rng& rng) {
    ResetResult result;
    result.state.elapsed_steps = 0;
    switch (spec.name) {
        case EnvName::pendulum: {
            const double theta = rng.uniform(-M_PI, M_PI);
            const double theta_dot = rng.uniform(-1.0, 1.0);
            result.state.internal = {theta, theta_dot};
            result.observation = pendulum_obs(result.state);
            break;
        }
        case EnvName::sparse_point_mass:
            result.state.internal = {0.0, 0.0};
            result.observation = {0.0, 0.0};
            break;
        case EnvName::quadratic_bandit: {
            const double s = rng.uniform(-1.0, 1.0);
            result.state.internal = {s};
            result.observation = {s};
            break;
        }
    }
    return result;
}

StepResult step(const EnvSpec& spec, const EnvState& state, const Vec& action) {
    if (static_cast<int>(action.size()) != spec.action_dim) {
        throw std::invalid_argument("action dimension " + std::to_string(action.size()) +
                                    " does not match spec " + std::to_string(spec.action_dim));
    }
    for (double a : action) {
        if (!std::isfinite(a)) {
            throw std::invalid_argument("non-finite action component");
        }
    }

    StepResult result;
    result.state = state;
    result.state.elapsed_steps = state.elapsed_steps + 1;

    Vec clipped(action.size());
    for (size_t d = 0; d < action.size(); ++d) {
        clipped[d] = clip(action[d], spec.action_lo[d], spec.action_hi[d]);
        if (clipped[d] != action[d]) {
            ++result.state.clip_count;
        }
    }

    switch (spec.name) {
        case EnvName::pendulum: {
            const double theta = state.internal[0];
            double theta_dot = state.internal[1];
            const double torque = clipped[0];
            theta_dot += (3.0 * kGravity / (2.0 * kLength) * std::sin(theta) +
                          3.0 / (kMass * kLength * kLength) * torque) *
                         kDt;
            theta_dot = clip(theta_dot, -kMaxSpeed, kMaxSpeed);
            const double new_theta = theta + theta_dot * kDt;
            result.state.internal = {new_theta, theta_dot};
            result.observation = pendulum_obs(result.state);
            const double angle = wrap_angle(new_theta);
            result.reward =
                -(angle * angle + 0.1 * theta_dot * theta_dot + 0.001 * torque * torque);
            result.done = result.state.elapsed_steps >= spec.max_episode_steps;
            break;
        }
        case EnvName::sparse_point_mass: {
            const double x = clip(state.internal[0] + kMoveScale * clipped[0], -1.0, 1.0);
            const double y = clip(state.internal[1] + kMoveScale * clipped[1], -1.0, 1.0);
            result.state.internal = {x, y};
            result.observation = {x, y};
            const double dx = x - kGoalX;
            const double dy = y - kGoalY;
            const bool at_goal = std::sqrt(dx * dx + dy * dy) < kGoalRadius;
            result.reward = at_goal ? 1.0 : 0.0;
            result.done = at_goal || result.state.elapsed_steps >= spec.max_episode_steps;
            break;
        }
        case EnvName::quadratic_bandit: {
            const double s = state.internal[0];
            const double gap = clipped[0] - 0.5 * s;
            result.reward = -gap * gap;
            result.done = true;
            result.observation = {s};
            break;
        }
    }
    return result;
}

}  // namespace cmp::env
