// Acceptance suite: one check per release criterion, each printed as a
// single PASS/FAIL line. Run with no arguments for the full battery or with
// a criterion number (1-10) for a single check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cmp/csv.hpp"
#include "cmp/gradcheck.hpp"
#include "cmp/grads_detail.hpp"
#include "cmp/orchestrator.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cmp;
using config::RunConfig;
using Vec = std::vector<double>;

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string fmt(double v) { return csv::format(v); }

// ---- criterion 1: finite-difference verification of every gradient path ----

bool check_gradients(std::string& detail) {
    const auto started = std::chrono::steady_clock::now();
    const auto results = gradcheck::run_all();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    bool ok = results.size() == 5;
    std::string worst_name;
    double worst = 0.0;
    for (const auto& r : results) {
        if (r.max_rel_err > worst) {
            worst = r.max_rel_err;
            worst_name = r.name;
        }
        ok = ok && r.passed();
    }
    ok = ok && elapsed < 60.0;
    detail = "worst " + worst_name + " rel err " + fmt(worst) + " (tol 0.0001), " +
             fmt(elapsed) + "s";
    return ok;
}

// ---- criterion 2: gain equals cost when the explorer mirrors the actor ----

bool check_identity(std::string& detail) {
    double worst = 0.0;
    for (uint64_t seed : {101, 202, 303}) {
        Rng rng(seed);
        const auto spec = env::make_spec(env::EnvName::pendulum);
        ddpg::ExploitAgent agent = ddpg::make_agent(spec, {}, rng);
        meta::MetaQNet metaq = meta::make_metaq(spec, {}, rng);
        meta::ExplorePolicy explore = meta::make_explore_policy(spec, {}, rng);
        explore.mean = agent.actor;  // weight copy
        explore.log_std.assign(explore.log_std.size(), std::log(1e-8));

        Rng rollout_rng(seed + 1);
        rl::Trajectory traj = rl::rollout(
            spec,
            [&](const Vec& obs) {
                auto sample = meta::sample_explore_action(explore, obs, rollout_rng);
                return rl::ActionChoice{sample.action, sample.log_prob};
            },
            100, rollout_rng);
        traj.source = rl::Source::explore;
        const meta::CvReport report =
            meta::counterfactual_value(agent, explore, metaq, traj, 1.0);
        worst = std::max(worst, std::abs(report.advantage));
    }
    detail = "max |advantage| " + fmt(worst) + " (tol 1e-06)";
    return worst < 1e-6;
}

// ---- criterion 3: meta value loss arithmetic ----

bool check_metaq_arithmetic(std::string& detail) {
    const double loss = meta::metaq_loss_terms(2.0, 3.0, 1.0, 0.9).loss;
    detail = "loss " + fmt(loss) + " vs 0.049383 (tol 1e-09)";
    return std::abs(loss - 0.04938271604938271) < 1e-9;
}

// ---- criterion 4: tabular value update arithmetic ----

bool check_tabular_arithmetic(std::string& detail) {
    const double updated = ddpg::tabular_q_update(1.0, 1.0, 0.9, 2.0, 0.5);
    detail = "updated value " + fmt(updated) + " vs 1.9";
    return std::abs(updated - 1.9) < 1e-12;
}

// ---- criterion 5: critic convergence on the closed-form bandit ----

bool check_critic_convergence(std::string& detail) {
    RunConfig cfg;
    cfg.env = env::EnvName::quadratic_bandit;
    cfg.algo = config::Algo::ddpg;
    cfg.exploration_steps = 200;
    cfg.eval_steps = 50;
    cfg.iterations = 16;  // 50 + 16 * 300 = 4850 env steps
    cfg.exploit_update_times = 250;
    cfg.noise_sigma = 1.5;
    cfg.actor_lr = 1e-3;

    std::vector<double> errors, returns;
    for (uint64_t seed = 0; seed < 5; ++seed) {
        train::TrainState state = train::init_train(cfg, seed);
        double final_eval = 0.0;
        for (int i = 0; i < cfg.iterations; ++i) {
            final_eval = train::run_iteration(state).eval_return;
        }
        double worst = 0.0;
        for (int i = 0; i <= 20; ++i) {
            for (int j = 0; j <= 20; ++j) {
                const double s = -1.0 + 0.1 * i;
                const double a = -1.0 + 0.1 * j;
                const double gap = a - 0.5 * s;
                const double got =
                    nn::mlp_forward(state.exploit.critic, std::vector<double>{s, a})[0];
                worst = std::max(worst, std::abs(got + gap * gap));
            }
        }
        errors.push_back(worst);
        returns.push_back(final_eval);
        if (state.env_steps > 5000) {
            detail = "env-step budget exceeded";
            return false;
        }
    }
    const double median_err = median(errors);
    const double median_ret = median(returns);
    detail = "median grid error " + fmt(median_err) + " (tol 0.05), median return " +
             fmt(median_ret) + " (floor -0.01)";
    return median_err < 0.05 && median_ret > -0.01;
}

// ---- criterion 6: pendulum sample-efficiency ordering ----

long steps_to_threshold(const std::vector<train::IterationRecord>& records) {
    std::deque<double> window;
    for (const auto& r : records) {
        window.push_back(r.eval_return);
        if (window.size() > 10) window.pop_front();
        double mean = 0.0;
        for (double v : window) mean += v;
        if (mean / static_cast<double>(window.size()) >= -300.0) return r.env_steps;
    }
    return -1;
}

bool check_pendulum_learning(std::string& detail) {
    RunConfig cfg;         // pendulum defaults
    cfg.iterations = 59;   // 200 + 59 * 500 = 29700 env steps

    auto arm_median = [&cfg](config::Algo algo) {
        RunConfig arm = cfg;
        arm.algo = algo;
        std::vector<double> thresholds;
        for (uint64_t seed = 0; seed < 5; ++seed) {
            const long steps = steps_to_threshold(train::train(arm, seed));
            // unreached runs rank above every reached one
            thresholds.push_back(steps < 0 ? 1e9 : static_cast<double>(steps));
        }
        return median(thresholds);
    };

    const double ddpg_median = arm_median(config::Algo::ddpg);
    const double cmp_median = arm_median(config::Algo::cmp);
    detail = "median steps to -300: ddpg " + fmt(ddpg_median) + ", cmp " + fmt(cmp_median);
    return ddpg_median <= 30000.0 && cmp_median <= ddpg_median;
}

// ---- criterion 7: sparse-goal discovery ordering ----

bool check_sparse_exploration(std::string& detail) {
    RunConfig cfg;
    cfg.env = env::EnvName::sparse_point_mass;
    cfg.exploration_steps = 1000;
    cfg.eval_steps = 200;
    cfg.iterations = 35;  // 200 + 35 * 1400 = 49200 env steps
    cfg.hidden_sizes = {32, 32};
    cfg.exploit_update_times = 100;
    cfg.explore_update_times = 10;
    cfg.explore_lr = 3e-4;
    cfg.log_std_init = 2.0;  // wide learned exploration from the start
    cfg.gamma = 0.95;

    auto arm_hits = [&cfg](config::Algo algo) {
        RunConfig arm = cfg;
        arm.algo = algo;
        std::vector<double> hits;
        for (uint64_t seed = 0; seed < 10; ++seed) {
            train::TrainState state = train::init_train(arm, seed);
            for (int i = 0; i < arm.iterations; ++i) train::run_iteration(state);
            hits.push_back(static_cast<double>(state.goal_hits));
        }
        return hits;
    };

    const double cmp_median = median(arm_hits(config::Algo::cmp));
    const double ddpg_median = median(arm_hits(config::Algo::ddpg));
    detail = "median goal hits over 10 seeds: cmp " + fmt(cmp_median) + ", ddpg " +
             fmt(ddpg_median);
    return cmp_median > ddpg_median;
}

// ---- criterion 8: the immediate Q-gap responds monotonically to beta ----

bool check_beta_ordering(std::string& detail) {
    RunConfig cfg;
    cfg.env = env::EnvName::quadratic_bandit;
    cfg.exploration_steps = 100;
    cfg.eval_steps = 50;
    cfg.iterations = 40;
    cfg.hidden_sizes = {32, 32};
    cfg.explore_update_times = 12;
    cfg.metaq_update_times = 0;  // isolate the immediate term

    std::vector<double> medians;
    for (double beta : {0.0, 0.5, 1.0}) {
        RunConfig arm = cfg;
        arm.beta = beta;
        std::vector<double> gaps;
        for (uint64_t seed = 0; seed < 5; ++seed) {
            const auto records = train::train(arm, seed);
            double mean_gap = 0.0;
            int n = 0;
            for (const auto& r : records) {
                if (r.immediate_gap) {
                    mean_gap += *r.immediate_gap;
                    ++n;
                }
            }
            gaps.push_back(mean_gap / n);
        }
        medians.push_back(median(gaps));
    }
    detail = "median immediate gap: beta 0 -> " + fmt(medians[0]) + ", beta 0.5 -> " +
             fmt(medians[1]) + ", beta 1 -> " + fmt(medians[2]);
    return medians[0] <= medians[1] && medians[1] <= medians[2];
}

// ---- criterion 9: byte-identical CSVs for identical config and seed ----

bool check_determinism(std::string& detail) {
    RunConfig cfg;
    cfg.env = env::EnvName::pendulum;
    cfg.iterations = 3;
    cfg.exploration_steps = 60;
    cfg.eval_steps = 200;
    cfg.exploit_update_times = 10;
    cfg.explore_update_times = 5;
    cfg.metaq_update_times = 2;
    cfg.hidden_sizes = {24, 24};

    const fs::path dir = fs::temp_directory_path() / "cmp_acceptance_determinism";
    fs::create_directories(dir);
    auto write_run = [&](const std::string& name) {
        const std::string path = (dir / name).string();
        csv::Writer writer(path, train::csv_header());
        train::train(cfg, 42, [&](const train::IterationRecord& r) {
            writer.write_row(train::csv_row(r, cfg.log_wallclock));
        });
        std::ifstream file(path, std::ios::binary);
        std::stringstream buffer;
        buffer << file.rdbuf();
        return buffer.str();
    };
    const std::string first = write_run("a.csv");
    const std::string second = write_run("b.csv");
    fs::remove_all(dir);
    detail = first == second
                 ? "two runs, " + std::to_string(first.size()) + " bytes each, equal"
                 : "files differ";
    return first == second && !first.empty();
}

// ---- criterion 10: the meta value net learns a fixed synthetic target ----

bool check_metaq_learnability(std::string& detail) {
    Rng rng(77);
    const auto spec = env::make_spec(env::EnvName::pendulum);
    meta::MetaQNet metaq = meta::make_metaq(spec, {}, rng);

    auto synthetic_traj = [&rng](int n) {
        rl::Trajectory traj;
        traj.source = rl::Source::explore;
        traj.steps.resize(static_cast<size_t>(n));
        for (auto& t : traj.steps) {
            t.s = {rng.normal(), rng.normal(), rng.normal()};
            t.a = {rng.uniform(-2.0, 2.0)};
            t.s2 = t.s;
        }
        return traj;
    };
    meta::MetaMemory memory;
    memory.prev_traj = synthetic_traj(40);
    memory.prev_meta_reward = 30.0;
    memory.valid = true;
    const rl::Trajectory current = synthetic_traj(40);

    double initial = 0.0, final_loss = 0.0;
    for (int step = 0; step < 50; ++step) {
        const double loss = meta::metaq_update(metaq, memory, current);
        if (step == 0) initial = loss;
        final_loss = loss;
    }
    detail = "loss " + fmt(initial) + " -> " + fmt(final_loss) + " after 50 updates";
    return final_loss < 0.1 * initial;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "gradient oracle suite", check_gradients},
        {2, "gain equals cost identity", check_identity},
        {3, "meta value loss arithmetic", check_metaq_arithmetic},
        {4, "tabular value update arithmetic", check_tabular_arithmetic},
        {5, "critic convergence on the bandit", check_critic_convergence},
        {6, "pendulum sample-efficiency ordering", check_pendulum_learning},
        {7, "sparse-goal discovery ordering", check_sparse_exploration},
        {8, "beta ordering of the immediate gap", check_beta_ordering},
        {9, "byte-identical reruns", check_determinism},
        {10, "meta value learnability", check_metaq_learnability},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 10) {
            std::fprintf(stderr, "usage: acceptance [1-10]\n");
            return 2;
        }
    }

    int failures = 0;
    for (const Criterion& criterion : criteria()) {
        if (only != 0 && criterion.id != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
