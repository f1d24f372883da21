#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmp/rng.hpp"

namespace cmp::nn {

using Vec = std::vector<double>;

// Output mapping applied after the last affine layer.
enum class Squash {
    linear,       // identity
    tanh_bounds,  // per-dim: center + half_range * tanh(y)
};

struct LayerSpec {
    int in = 0;
    int out = 0;
    bool layer_norm = false;  // hidden layers only
    // offsets into Mlp::params
    size_t w_off = 0;     // out*in weights, row-major
    size_t b_off = 0;     // out biases
    size_t gain_off = 0;  // out layer-norm gains (when layer_norm)
    size_t beta_off = 0;  // out layer-norm biases (when layer_norm)
};

// Feedforward net with ReLU hidden activations, optional layer norm applied
// between the affine map and the activation, and a linear or tanh-squashed
// output. All parameters live in one flat vector in a fixed order so the
// optimizer and the finite-difference oracle can address them uniformly.
struct Mlp {
    std::vector<LayerSpec> layers;
    Vec params;
    Squash squash = Squash::linear;
    Vec out_lo, out_hi;  // bounds for tanh_bounds, size == output_dim

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    size_t param_count() const { return params.size(); }
};

// Gradients in the same flat layout as Mlp::params, plus the gradient with
// respect to the network input.
struct GradBundle {
    Vec params;
    Vec input;

    void clear() {
        params.assign(params.size(), 0.0);
        input.assign(input.size(), 0.0);
    }
};

struct MlpConfig {
    int input_dim = 0;
    std::vector<int> hidden = {64, 64};
    int output_dim = 1;
    bool layer_norm = true;
    Squash squash = Squash::linear;
    Vec out_lo, out_hi;       // required for tanh_bounds
    double final_scale = 1.0; // extra factor on last-layer init (small initial actions)
};

Mlp make_mlp(const MlpConfig& config, Rng& rng);

// Per-layer intermediates captured during a traced forward pass.
struct LayerTrace {
    Vec input;       // x fed to the affine map
    Vec affine;      // z = W x + b
    Vec normalized;  // y = (z - mu) / sqrt(var + eps), empty when no layer norm
    double inv_sigma = 0.0;
    Vec activated;   // layer output after activation / squash
};

struct ForwardTrace {
    std::vector<LayerTrace> layers;
    const Vec& output() const { return layers.back().activated; }
};

Vec mlp_forward(const Mlp& net, std::span<const double> input);
void mlp_forward_trace(const Mlp& net, std::span<const double> input, ForwardTrace& trace);

// Backward pass for a scalar loss L with upstream = dL/d(output). Fills
// `grads` (accumulating onto existing contents) and returns nothing; callers
// zero the bundle when they want fresh gradients.
void mlp_backward(const Mlp& net, const ForwardTrace& trace, std::span<const double> upstream,
                  GradBundle& grads);

GradBundle make_grad_bundle(const Mlp& net);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction over a flat parameter vector.
class Adam {
  public:
    Adam() = default;
    explicit Adam(size_t param_count, AdamConfig config = {})
        : m_(param_count, 0.0), v_(param_count, 0.0), config_(config) {}

    void step(std::span<double> params, std::span<const double> grads, double lr);

    long step_count() const { return step_count_; }
    const AdamConfig& config() const { return config_; }

  private:
    Vec m_, v_;
    AdamConfig config_;
    long step_count_ = 0;
};

// Central-difference gradient of an arbitrary scalar function of the
// parameters. Test oracle; O(param_count) evaluations of loss_fn.
template <typename LossFn>
Vec finite_diff_grad(LossFn&& loss_fn, Mlp& net, double eps) {
    Vec grad(net.param_count(), 0.0);
    for (size_t i = 0; i < net.params.size(); ++i) {
        const double saved = net.params[i];
        net.params[i] = saved + eps;
        const double up = loss_fn(static_cast<const Mlp&>(net));
        net.params[i] = saved - eps;
        const double down = loss_fn(static_cast<const Mlp&>(net));
        net.params[i] = saved;
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

// Same oracle over a bare vector of parameters (log-std vectors and the like).
template <typename LossFn>
Vec finite_diff_grad_vec(LossFn&& loss_fn, Vec& params, double eps) {
    Vec grad(params.size(), 0.0);
    for (size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double up = loss_fn(static_cast<const Vec&>(params));
        params[i] = saved - eps;
        const double down = loss_fn(static_cast<const Vec&>(params));
        params[i] = saved;
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

// max over components of |a-b| / max(floor, |a|+|b|). The floor sits above
// the roundoff of central differences at eps 1e-5 (about 1e-10 absolute), so
// components below it are effectively compared in absolute terms.
double max_rel_err(std::span<const double> a, std::span<const double> b, double floor = 1e-5);

}  // namespace cmp::nn
