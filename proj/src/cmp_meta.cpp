#include "cmp/cmp_meta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmp/grads_detail.hpp"

namespace cmp::meta {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

Vec concat(const Vec& s, const Vec& a) {
    Vec sa;
    sa.reserve(s.size() + a.size());
    sa.insert(sa.end(), s.begin(), s.end());
    sa.insert(sa.end(), a.begin(), a.end());
    return sa;
}

}  // namespace

double ExplorePolicy::log_std_mean() const {
    double total = 0.0;
    for (double v : log_std) total += v;
    return total / static_cast<double>(log_std.size());
}

ExplorePolicy make_explore_policy(const env::EnvSpec& spec, const ExploreConfig& config,
                                  Rng& rng) {
    if (config.log_std_init < kLogStdMin || config.log_std_init > kLogStdMax) {
        throw std::invalid_argument("log_std_init outside the clamp range");
    }
    ExplorePolicy policy;
    nn::MlpConfig mean_cfg;
    mean_cfg.input_dim = spec.obs_dim;
    mean_cfg.hidden = config.hidden;
    mean_cfg.output_dim = spec.action_dim;
    mean_cfg.layer_norm = config.layer_norm;
    mean_cfg.squash = nn::Squash::tanh_bounds;
    mean_cfg.out_lo = spec.action_lo;
    mean_cfg.out_hi = spec.action_hi;
    mean_cfg.final_scale = 1e-3;
    policy.mean = nn::make_mlp(mean_cfg, rng);
    policy.log_std.assign(static_cast<size_t>(spec.action_dim), config.log_std_init);
    policy.action_lo = spec.action_lo;
    policy.action_hi = spec.action_hi;
    policy.lr = config.lr;
    policy.grad_clip = config.grad_clip;
    policy.normalize_advantage = config.normalize_advantage;
    return policy;
}

ExploreSample explore_action_from_noise(const ExplorePolicy& policy, const Vec& obs,
                                        const Vec& z) {
    const Vec mean = nn::mlp_forward(policy.mean, obs);
    if (z.size() != mean.size()) {
        throw std::invalid_argument("noise dimension does not match the action dimension");
    }
    ExploreSample sample;
    sample.action.resize(mean.size());
    sample.pre_clip.resize(mean.size());
    sample.log_prob = 0.0;
    for (size_t d = 0; d < mean.size(); ++d) {
        const double pre_clip = mean[d] + std::exp(policy.log_std[d]) * z[d];
        sample.pre_clip[d] = pre_clip;
        sample.action[d] =
            std::min(policy.action_hi[d], std::max(policy.action_lo[d], pre_clip));
        sample.log_prob += -0.5 * z[d] * z[d] - policy.log_std[d] - kHalfLog2Pi;
    }
    return sample;
}

ExploreSample sample_explore_action(const ExplorePolicy& policy, const Vec& obs, Rng& rng) {
    Vec z(policy.log_std.size());
    for (double& v : z) v = rng.normal();
    return explore_action_from_noise(policy, obs, z);
}

double explore_logp(const ExplorePolicy& policy, const Vec& s, const Vec& a) {
    const Vec mean = nn::mlp_forward(policy.mean, s);
    double logp = 0.0;
    for (size_t d = 0; d < mean.size(); ++d) {
        const double sigma = std::exp(policy.log_std[d]);
        const double standardized = (a[d] - mean[d]) / sigma;
        logp += -0.5 * standardized * standardized - policy.log_std[d] - kHalfLog2Pi;
    }
    return logp;
}

MetaQNet make_metaq(const env::EnvSpec& spec, const MetaQConfig& config, Rng& rng) {
    if (config.gamma_meta <= 0.0 || config.gamma_meta >= 1.0) {
        throw std::invalid_argument("gamma_meta must lie in (0, 1)");
    }
    MetaQNet metaq;
    nn::MlpConfig cfg;
    cfg.input_dim = spec.obs_dim + spec.action_dim;
    cfg.hidden = config.hidden;
    cfg.output_dim = 1;
    cfg.layer_norm = config.layer_norm;
    metaq.net = nn::make_mlp(cfg, rng);
    metaq.target = metaq.net;
    metaq.opt = nn::Adam(metaq.net.param_count());
    metaq.gamma_meta = config.gamma_meta;
    metaq.lr = config.lr;
    return metaq;
}

rl::Trajectory counterfactual_relabel(const rl::Trajectory& traj, const rl::ActorFn& actor) {
    rl::Trajectory relabeled = traj;
    relabeled.counterfactual = true;
    for (rl::Transition& t : relabeled.steps) {
        t.a = actor(t.s);
        t.log_prob.reset();
    }
    return relabeled;
}

double traj_meta_q(const MetaQNet& metaq, std::span<const rl::Transition> pairs,
                   bool use_target) {
    if (pairs.empty()) {
        throw std::invalid_argument("traj_meta_q over an empty pair list");
    }
    const nn::Mlp& net = use_target ? metaq.target : metaq.net;
    double total = 0.0;
    for (const rl::Transition& t : pairs) {
        total += nn::mlp_forward(net, concat(t.s, t.a))[0];
    }
    return total;
}

CvReport counterfactual_value(const ddpg::ExploitAgent& exploit, const ExplorePolicy& explore,
                              const MetaQNet& metaq, const rl::Trajectory& traj, double beta) {
    (void)explore;  // the trajectory already carries the explore policy's actions
    if (traj.empty()) {
        throw std::invalid_argument("counterfactual_value over an empty trajectory");
    }
    if (traj.source != rl::Source::explore) {
        throw std::invalid_argument("counterfactual_value requires an exploration trajectory");
    }

    const rl::Trajectory relabeled = counterfactual_relabel(
        traj, [&exploit](const Vec& obs) { return exploit.act(obs); });

    CvReport report;
    report.meta_gain = traj_meta_q(metaq, traj.steps, /*use_target=*/false);
    report.meta_cost = traj_meta_q(metaq, relabeled.steps, /*use_target=*/false);
    for (size_t k = 0; k < traj.steps.size(); ++k) {
        report.sum_q_explore +=
            nn::mlp_forward(exploit.critic, concat(traj.steps[k].s, traj.steps[k].a))[0];
        report.sum_q_exploit +=
            nn::mlp_forward(exploit.critic, concat(relabeled.steps[k].s, relabeled.steps[k].a))[0];
    }
    report.immediate_gap = report.sum_q_explore - report.sum_q_exploit;
    report.beta_immediate = beta * report.immediate_gap;
    report.gain = report.meta_gain + beta * report.sum_q_explore;
    report.cost = report.meta_cost + beta * report.sum_q_exploit;
    report.advantage = report.gain - report.cost;
    if (!std::isfinite(report.advantage)) {
        throw std::runtime_error("counterfactual advantage is not finite");
    }
    return report;
}

MetaQLossTerms metaq_loss_terms(double current_sum, double prev_sum, double prev_meta_reward,
                                double gamma_meta) {
    MetaQLossTerms terms;
    terms.target = (prev_sum - prev_meta_reward) / gamma_meta;
    const double gap = current_sum - terms.target;
    terms.loss = gap * gap;
    return terms;
}

double metaq_loss_grads(const MetaQNet& metaq, const MetaMemory& memory,
                        const rl::Trajectory& current, nn::GradBundle& grads) {
    const double prev_sum = traj_meta_q(metaq, memory.prev_traj.steps, /*use_target=*/true);

    // forward pass for the current sum, keeping traces for the backward pass
    std::vector<nn::ForwardTrace> traces(current.steps.size());
    double current_sum = 0.0;
    for (size_t k = 0; k < current.steps.size(); ++k) {
        nn::mlp_forward_trace(metaq.net, concat(current.steps[k].s, current.steps[k].a),
                              traces[k]);
        current_sum += traces[k].output()[0];
    }

    const MetaQLossTerms terms =
        metaq_loss_terms(current_sum, prev_sum, memory.prev_meta_reward, metaq.gamma_meta);
    const double upstream[1] = {2.0 * (current_sum - terms.target)};
    for (const nn::ForwardTrace& trace : traces) {
        nn::mlp_backward(metaq.net, trace, upstream, grads);
    }
    return terms.loss;
}

double metaq_update(MetaQNet& metaq, const MetaMemory& memory, const rl::Trajectory& current) {
    if (!memory.valid) {
        throw std::logic_error("metaq_update requires a valid memory (iteration >= 1)");
    }
    if (current.empty()) {
        throw std::invalid_argument("metaq_update over an empty trajectory");
    }
    nn::GradBundle grads = nn::make_grad_bundle(metaq.net);
    const double loss = metaq_loss_grads(metaq, memory, current, grads);
    if (!std::isfinite(loss)) {
        throw std::runtime_error("meta value loss is not finite");
    }
    metaq.opt.step(metaq.net.params, grads.params, metaq.lr);
    return loss;
}

double explore_objective_grads(const ExplorePolicy& policy, const rl::Trajectory& traj,
                               double advantage, nn::GradBundle& mean_grads,
                               std::vector<double>& log_std_grads) {
    nn::ForwardTrace trace;
    double logp_sum = 0.0;
    for (const rl::Transition& t : traj.steps) {
        nn::mlp_forward_trace(policy.mean, t.s, trace);
        const Vec& mean = trace.output();
        Vec d_mean(mean.size(), 0.0);
        for (size_t d = 0; d < mean.size(); ++d) {
            const double inv_var = std::exp(-2.0 * policy.log_std[d]);
            const double diff = t.a[d] - mean[d];
            logp_sum += -0.5 * diff * diff * inv_var - policy.log_std[d] - kHalfLog2Pi;
            // d logp / d mean and d logp / d log_std, scaled by the advantage
            d_mean[d] = advantage * diff * inv_var;
            log_std_grads[d] += advantage * (diff * diff * inv_var - 1.0);
        }
        nn::mlp_backward(policy.mean, trace, d_mean, mean_grads);
    }
    return advantage * logp_sum;
}

double explore_policy_update(ExplorePolicy& policy, const rl::Trajectory& traj,
                             double advantage) {
    if (traj.empty()) {
        throw std::invalid_argument("explore_policy_update over an empty trajectory");
    }
    if (!std::isfinite(advantage)) {
        throw std::invalid_argument("advantage must be finite");
    }
    const double scaled_advantage =
        policy.normalize_advantage ? advantage / static_cast<double>(traj.size()) : advantage;

    nn::GradBundle mean_grads = nn::make_grad_bundle(policy.mean);
    Vec log_std_grads(policy.log_std.size(), 0.0);
    const double objective =
        explore_objective_grads(policy, traj, scaled_advantage, mean_grads, log_std_grads);
    if (!std::isfinite(objective)) {
        throw std::runtime_error("exploration objective is not finite");
    }

    // clipped plain ascent; see the ExplorePolicy note on why not Adam
    double norm_sq = 0.0;
    for (double g : mean_grads.params) norm_sq += g * g;
    for (double g : log_std_grads) norm_sq += g * g;
    if (!std::isfinite(norm_sq)) {
        throw std::runtime_error("exploration gradient is not finite");
    }
    double scale = policy.lr;
    const double norm = std::sqrt(norm_sq);
    if (norm > policy.grad_clip) {
        scale *= policy.grad_clip / norm;
    }
    for (size_t i = 0; i < policy.mean.params.size(); ++i) {
        policy.mean.params[i] += scale * mean_grads.params[i];
    }
    for (size_t i = 0; i < policy.log_std.size(); ++i) {
        policy.log_std[i] = std::min(
            kLogStdMax, std::max(kLogStdMin, policy.log_std[i] + scale * log_std_grads[i]));
    }
    return -objective;
}

}  // namespace cmp::meta
