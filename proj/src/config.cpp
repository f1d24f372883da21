#include "cmp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cmp/cmp_meta.hpp"

namespace cmp::config {

namespace {

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const long parsed = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        out.push_back(static_cast<int>(parse_int(key, trim(item))));
    }
    if (out.empty()) {
        throw ConfigError("key '" + key + "': expected a comma-separated integer list");
    }
    return out;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

Algo algo_from_string(const std::string& name) {
    if (name == "ddpg") return Algo::ddpg;
    if (name == "ma2c") return Algo::ma2c;
    if (name == "cmp") return Algo::cmp;
    throw ConfigError("unknown algo '" + name + "' (expected ddpg, ma2c or cmp)");
}

std::string to_string(Algo algo) {
    switch (algo) {
        case Algo::ddpg: return "ddpg";
        case Algo::ma2c: return "ma2c";
        case Algo::cmp: return "cmp";
    }
    return "?";
}

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "env") {
        try {
            c.env = env::env_from_string(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "algo") {
        c.algo = algo_from_string(value);
    } else if (key == "beta") {
        c.beta = parse_double(key, value);
    } else if (key == "iterations") {
        c.iterations = static_cast<int>(parse_int(key, value));
    } else if (key == "exploration_steps") {
        c.exploration_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "eval_steps") {
        c.eval_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "exploit_update_times") {
        c.exploit_update_times = static_cast<int>(parse_int(key, value));
    } else if (key == "explore_update_times") {
        c.explore_update_times = static_cast<int>(parse_int(key, value));
    } else if (key == "metaq_update_times") {
        c.metaq_update_times = static_cast<int>(parse_int(key, value));
    } else if (key == "gamma") {
        c.gamma = parse_double(key, value);
    } else if (key == "gamma_meta") {
        c.gamma_meta = parse_double(key, value);
    } else if (key == "actor_lr") {
        c.actor_lr = parse_double(key, value);
    } else if (key == "critic_lr") {
        c.critic_lr = parse_double(key, value);
    } else if (key == "explore_lr") {
        c.explore_lr = parse_double(key, value);
    } else if (key == "explore_grad_clip") {
        c.explore_grad_clip = parse_double(key, value);
    } else if (key == "metaq_lr") {
        c.metaq_lr = parse_double(key, value);
    } else if (key == "tau_soft") {
        c.tau_soft = parse_double(key, value);
    } else if (key == "buffer_capacity") {
        c.buffer_capacity = static_cast<int>(parse_int(key, value));
    } else if (key == "batch_size") {
        c.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "hidden_sizes") {
        c.hidden_sizes = parse_int_list(key, value);
    } else if (key == "noise_sigma") {
        c.noise_sigma = parse_double(key, value);
    } else if (key == "log_std_init") {
        c.log_std_init = parse_double(key, value);
    } else if (key == "layer_norm") {
        c.layer_norm = parse_bool(key, value);
    } else if (key == "advantage_norm") {
        c.advantage_norm = parse_bool(key, value);
    } else if (key == "log_wallclock") {
        c.log_wallclock = parse_bool(key, value);
    } else if (key == "seed") {
        c.seed = static_cast<uint64_t>(parse_int(key, value));
    } else if (key == "out_dir") {
        c.out_dir = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::stringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        }
        apply_override(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate(config);
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_config_text(buffer.str());
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& message) {
        if (!ok) throw ConfigError(message);
    };
    require(c.beta >= 0.0, "key 'beta': must be >= 0");
    require(c.iterations >= 1, "key 'iterations': must be >= 1");
    require(c.exploration_steps >= 1, "key 'exploration_steps': must be >= 1");
    require(c.eval_steps >= 1, "key 'eval_steps': must be >= 1");
    require(c.exploit_update_times >= 0, "key 'exploit_update_times': must be >= 0");
    require(c.explore_update_times >= 0, "key 'explore_update_times': must be >= 0");
    require(c.metaq_update_times >= 0, "key 'metaq_update_times': must be >= 0");
    require(c.gamma > 0.0 && c.gamma < 1.0, "key 'gamma': must lie in (0, 1)");
    require(c.gamma_meta > 0.0 && c.gamma_meta < 1.0, "key 'gamma_meta': must lie in (0, 1)");
    require(c.actor_lr > 0.0, "key 'actor_lr': must be > 0");
    require(c.critic_lr > 0.0, "key 'critic_lr': must be > 0");
    require(c.explore_lr > 0.0, "key 'explore_lr': must be > 0");
    require(c.explore_grad_clip > 0.0, "key 'explore_grad_clip': must be > 0");
    require(c.metaq_lr > 0.0, "key 'metaq_lr': must be > 0");
    require(c.tau_soft > 0.0 && c.tau_soft <= 1.0, "key 'tau_soft': must lie in (0, 1]");
    require(c.buffer_capacity >= 1, "key 'buffer_capacity': must be >= 1");
    require(c.batch_size >= 1, "key 'batch_size': must be >= 1");
    require(!c.hidden_sizes.empty(), "key 'hidden_sizes': must not be empty");
    for (int h : c.hidden_sizes) {
        require(h >= 1, "key 'hidden_sizes': entries must be >= 1");
    }
    require(c.noise_sigma >= 0.0, "key 'noise_sigma': must be >= 0");
    require(c.log_std_init >= meta::kLogStdMin && c.log_std_init <= meta::kLogStdMax,
            "key 'log_std_init': must lie in [-5, 2]");
    require(!c.out_dir.empty(), "key 'out_dir': must not be empty");
}

std::string render(const RunConfig& c) {
    std::ostringstream out;
    out << "env = " << env::to_string(c.env) << "\n";
    out << "algo = " << to_string(c.algo) << "\n";
    out << "beta = " << format_double(c.beta) << "\n";
    out << "iterations = " << c.iterations << "\n";
    out << "exploration_steps = " << c.exploration_steps << "\n";
    out << "eval_steps = " << c.eval_steps << "\n";
    out << "exploit_update_times = " << c.exploit_update_times << "\n";
    out << "explore_update_times = " << c.explore_update_times << "\n";
    out << "metaq_update_times = " << c.metaq_update_times << "\n";
    out << "gamma = " << format_double(c.gamma) << "\n";
    out << "gamma_meta = " << format_double(c.gamma_meta) << "\n";
    out << "actor_lr = " << format_double(c.actor_lr) << "\n";
    out << "critic_lr = " << format_double(c.critic_lr) << "\n";
    out << "explore_lr = " << format_double(c.explore_lr) << "\n";
    out << "explore_grad_clip = " << format_double(c.explore_grad_clip) << "\n";
    out << "metaq_lr = " << format_double(c.metaq_lr) << "\n";
    out << "tau_soft = " << format_double(c.tau_soft) << "\n";
    out << "buffer_capacity = " << c.buffer_capacity << "\n";
    out << "batch_size = " << c.batch_size << "\n";
    out << "hidden_sizes = ";
    for (size_t i = 0; i < c.hidden_sizes.size(); ++i) {
        if (i) out << ",";
        out << c.hidden_sizes[i];
    }
    out << "\n";
    out << "noise_sigma = " << format_double(c.noise_sigma) << "\n";
    out << "log_std_init = " << format_double(c.log_std_init) << "\n";
    out << "layer_norm = " << (c.layer_norm ? "true" : "false") << "\n";
    out << "advantage_norm = " << (c.advantage_norm ? "true" : "false") << "\n";
    out << "log_wallclock = " << (c.log_wallclock ? "true" : "false") << "\n";
    out << "seed = " << c.seed << "\n";
    out << "out_dir = " << c.out_dir << "\n";
    return out.str();
}

ArmSpec parse_arm(const std::string& name) {
    ArmSpec arm;
    arm.name = name;
    if (name == "ddpg") {
        arm.algo = Algo::ddpg;
        return arm;
    }
    if (name == "ma2c") {
        arm.algo = Algo::ma2c;
        return arm;
    }
    if (name == "cmp") {
        arm.algo = Algo::cmp;
        return arm;
    }
    if (name.rfind("cmp-", 0) == 0) {
        arm.algo = Algo::cmp;
        arm.beta = parse_double("algos", name.substr(4));
        if (*arm.beta < 0.0) {
            throw ConfigError("arm '" + name + "': beta must be >= 0");
        }
        return arm;
    }
    throw ConfigError("unknown arm '" + name + "' (expected ddpg, ma2c, cmp or cmp-<beta>)");
}

}  // namespace cmp::config
