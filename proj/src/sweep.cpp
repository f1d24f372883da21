#include "cmp/sweep.hpp"

#include <cmath>
#include <filesystem>

#include "cmp/csv.hpp"

namespace cmp::sweep {

namespace {

namespace fs = std::filesystem;

std::string run_csv_name(const config::RunConfig& cfg, uint64_t seed) {
    return "run_" + config::to_string(cfg.algo) + "_" + env::to_string(cfg.env) + "_seed" +
           std::to_string(seed) + ".csv";
}

}  // namespace

double final_performance(const std::vector<train::IterationRecord>& records) {
    const size_t window = std::min<size_t>(kFinalWindow, records.size());
    double total = 0.0;
    for (size_t i = records.size() - window; i < records.size(); ++i) {
        total += records[i].eval_return;
    }
    return total / static_cast<double>(window);
}

SweepResult run_sweep(const config::RunConfig& base, const std::vector<std::string>& arms,
                      const std::vector<uint64_t>& seeds) {
    if (seeds.empty()) {
        throw config::ConfigError("sweep requires at least one seed");
    }
    if (arms.empty()) {
        throw config::ConfigError("sweep requires at least one arm");
    }

    SweepResult result;
    for (const std::string& arm_name : arms) {
        const config::ArmSpec arm = config::parse_arm(arm_name);
        config::RunConfig cfg = base;
        cfg.algo = arm.algo;
        if (arm.beta) cfg.beta = *arm.beta;
        cfg.out_dir = (fs::path(base.out_dir) / arm.name).string();
        config::validate(cfg);
        fs::create_directories(cfg.out_dir);

        ArmSummary summary;
        summary.arm = arm.name;
        summary.algo = cfg.algo;
        summary.beta = cfg.algo == config::Algo::cmp ? cfg.beta : 0.0;

        std::vector<double> finals;
        for (uint64_t seed : seeds) {
            CellResult cell;
            cell.arm = arm.name;
            cell.seed = seed;
            cell.csv_path = (fs::path(cfg.out_dir) / run_csv_name(cfg, seed)).string();
            try {
                csv::Writer writer(cell.csv_path, train::csv_header());
                const std::vector<train::IterationRecord> records =
                    train::train(cfg, seed, [&](const train::IterationRecord& r) {
                        writer.write_row(train::csv_row(r, cfg.log_wallclock));
                    });
                cell.final_return = final_performance(records);
                finals.push_back(cell.final_return);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
                ++summary.n_failed;
            }
            ++summary.n_seeds;
            result.cells.push_back(std::move(cell));
        }

        if (!finals.empty()) {
            double mean = 0.0;
            for (double f : finals) mean += f;
            mean /= static_cast<double>(finals.size());
            double var = 0.0;
            for (double f : finals) var += (f - mean) * (f - mean);
            summary.mean_final = mean;
            summary.std_final =
                finals.size() > 1 ? std::sqrt(var / static_cast<double>(finals.size() - 1)) : 0.0;
        }
        result.summaries.push_back(std::move(summary));
    }

    fs::create_directories(base.out_dir);
    result.summary_path = (fs::path(base.out_dir) / "sweep_summary.csv").string();
    csv::Writer writer(result.summary_path,
                       {"arm", "algo", "beta", "env", "n_seeds", "n_failed", "final_return_mean",
                        "final_return_std"});
    for (const ArmSummary& s : result.summaries) {
        writer.write_row({s.arm, config::to_string(s.algo), csv::format(s.beta),
                          env::to_string(base.env), csv::format(static_cast<long>(s.n_seeds)),
                          csv::format(static_cast<long>(s.n_failed)), csv::format(s.mean_final),
                          csv::format(s.std_final)});
    }
    return result;
}

}  // namespace cmp::sweep
