#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmp/env.hpp"

namespace cmp::config {

enum class Algo {
    ddpg,  // Gaussian-noise baseline, no meta networks
    ma2c,  // meta gain term only
    cmp,   // full counterfactual advantage
};

Algo algo_from_string(const std::string& name);
std::string to_string(Algo algo);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    env::EnvName env = env::EnvName::pendulum;
    Algo algo = Algo::cmp;
    double beta = 1.0;
    int iterations = 100;
    int exploration_steps = 100;
    int eval_steps = 200;
    int exploit_update_times = 50;
    int explore_update_times = 50;
    int metaq_update_times = 5;
    double gamma = 0.99;
    double gamma_meta = 0.9;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double explore_lr = 1e-4;
    double explore_grad_clip = 1000.0;
    double metaq_lr = 1e-3;
    double tau_soft = 0.005;
    int buffer_capacity = 100000;
    int batch_size = 64;
    std::vector<int> hidden_sizes = {64, 64};
    double noise_sigma = 0.1;  // baseline exploration, action half-range units
    double log_std_init = -0.7;
    bool layer_norm = true;
    bool advantage_norm = true;
    bool log_wallclock = false;  // keeps CSV output reproducible by default
    uint64_t seed = 0;
    std::string out_dir = ".";

    bool operator==(const RunConfig&) const = default;
};

// Flat `key = value` lines, '#' comments. Unknown keys are rejected.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Apply one `key=value` override (CLI flags funnel through this).
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

void validate(const RunConfig& config);

// Inverse of parse_config_text: parse(render(c)) == c.
std::string render(const RunConfig& config);

// Sweep arm names: "ddpg", "ma2c", "cmp" or "cmp-<beta>" (e.g. cmp-0, cmp-1).
struct ArmSpec {
    std::string name;
    Algo algo = Algo::cmp;
    std::optional<double> beta;
};
ArmSpec parse_arm(const std::string& name);

}  // namespace cmp::config
