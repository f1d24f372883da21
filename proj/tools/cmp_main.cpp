// cmplab: train and study the counterfactual meta exploration policy against
// its baselines on desk-scale control environments.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmp/config.hpp"
#include "cmp/csv.hpp"
#include "cmp/gradcheck.hpp"
#include "cmp/orchestrator.hpp"
#include "cmp/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using cmp::config::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> algo;
    std::optional<double> beta;
    std::optional<std::string> env_name;
    std::optional<std::string> out_dir;
};

RunConfig load_config(const CommonFlags& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = cmp::config::parse_config_file(flags.config_path);
    }
    // flags override file values
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.algo) cmp::config::apply_override(cfg, "algo", *flags.algo);
    if (flags.beta) cfg.beta = *flags.beta;
    if (flags.env_name) cmp::config::apply_override(cfg, "env", *flags.env_name);
    if (flags.out_dir) {
        cfg.out_dir = *flags.out_dir;
    } else if (flags.config_path.empty() || cfg.out_dir == ".") {
        if (const char* env_out = std::getenv("CMP_OUT_DIR")) {
            cfg.out_dir = env_out;
        }
    }
    cmp::config::validate(cfg);
    return cfg;
}

std::vector<uint64_t> parse_seed_list(const std::string& list) {
    std::vector<uint64_t> seeds;
    std::stringstream stream(list);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) {
        throw cmp::config::ConfigError("--seeds: expected a comma-separated list of integers");
    }
    return seeds;
}

std::vector<std::string> parse_name_list(const std::string& list) {
    std::vector<std::string> names;
    std::stringstream stream(list);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) names.push_back(item);
    }
    return names;
}

int cmd_run(const CommonFlags& flags) {
    const RunConfig cfg = load_config(flags);
    fs::create_directories(cfg.out_dir);
    const std::string path =
        (fs::path(cfg.out_dir) / ("run_" + cmp::config::to_string(cfg.algo) + "_" +
                                  cmp::env::to_string(cfg.env) + "_seed" +
                                  std::to_string(cfg.seed) + ".csv"))
            .string();
    cmp::csv::Writer writer(path, cmp::train::csv_header());
    cmp::train::train(cfg, cfg.seed, [&](const cmp::train::IterationRecord& r) {
        writer.write_row(cmp::train::csv_row(r, cfg.log_wallclock));
    });
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonFlags& flags, const std::string& seeds_list,
              const std::string& algos_list) {
    RunConfig cfg = load_config(flags);
    const std::vector<uint64_t> seeds = parse_seed_list(seeds_list);
    std::vector<std::string> arms = parse_name_list(algos_list);
    if (arms.empty()) {
        arms = {"ddpg", "ma2c", "cmp-0", "cmp-1"};
    }
    const cmp::sweep::SweepResult result = cmp::sweep::run_sweep(cfg, arms, seeds);
    for (const cmp::sweep::ArmSummary& s : result.summaries) {
        std::cout << s.arm << ": " << cmp::csv::format(s.mean_final) << " +- "
                  << cmp::csv::format(s.std_final) << " (" << (s.n_seeds - s.n_failed) << "/"
                  << s.n_seeds << " seeds)\n";
    }
    for (const cmp::sweep::CellResult& cell : result.cells) {
        if (cell.failed) {
            std::cout << "FAILED " << cell.arm << " seed " << cell.seed << ": " << cell.error
                      << "\n";
        }
    }
    std::cout << "wrote " << result.summary_path << "\n";
    return kExitOk;
}

int cmd_gradcheck() {
    const std::vector<cmp::gradcheck::CheckResult> results = cmp::gradcheck::run_all();
    for (const cmp::gradcheck::CheckResult& r : results) {
        std::cout << (r.passed() ? "ok   " : "FAIL ") << r.name
                  << " max_rel_err=" << cmp::csv::format(r.max_rel_err) << "\n";
    }
    return cmp::gradcheck::exit_code(results);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"counterfactual meta exploration policy laboratory"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string seeds_list;
    std::string algos_list;

    auto add_common = [&flags](CLI::App* cmd) {
        cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
        cmd->add_option("--seed", flags.seed, "master seed");
        cmd->add_option("--algo", flags.algo, "ddpg | ma2c | cmp");
        cmd->add_option("--beta", flags.beta, "immediate-term weight");
        cmd->add_option("--env", flags.env_name,
                        "pendulum | sparse-point-mass | quadratic-bandit");
        cmd->add_option("--out", flags.out_dir, "output directory (or CMP_OUT_DIR)");
    };

    CLI::App* run = app.add_subcommand("run", "train once and write a per-iteration CSV");
    add_common(run);

    CLI::App* sweep =
        app.add_subcommand("sweep", "run an arms x seeds study and write a summary CSV");
    add_common(sweep);
    sweep->add_option("--seeds", seeds_list, "comma-separated master seeds")->required();
    sweep->add_option("--algos", algos_list,
                      "comma-separated arms: ddpg, ma2c, cmp or cmp-<beta> "
                      "(default ddpg,ma2c,cmp-0,cmp-1)");

    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "verify every analytic gradient against central finite differences");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(flags);
        if (sweep->parsed()) return cmd_sweep(flags, seeds_list, algos_list);
        if (gradcheck->parsed()) return cmd_gradcheck();
    } catch (const cmp::config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const cmp::csv::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}
