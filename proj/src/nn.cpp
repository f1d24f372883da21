#include "cmp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmp::nn {

namespace {

constexpr double kLayerNormEps = 1e-10;

void check_dim(int got, int want, int layer_index, const char* what) {
    if (got != want) {
        throw std::invalid_argument("mlp layer " + std::to_string(layer_index) + ": " + what +
                                    " has dimension " + std::to_string(got) + ", expected " +
                                    std::to_string(want));
    }
}

}  // namespace

Mlp make_mlp(const MlpConfig& config, Rng& rng) {
    if (config.input_dim <= 0 || config.output_dim <= 0) {
        throw std::invalid_argument("mlp dimensions must be positive");
    }
    if (config.squash == Squash::tanh_bounds &&
        (config.out_lo.size() != static_cast<size_t>(config.output_dim) ||
         config.out_hi.size() != static_cast<size_t>(config.output_dim))) {
        throw std::invalid_argument("tanh squash requires bounds matching the output dimension");
    }

    Mlp net;
    net.squash = config.squash;
    net.out_lo = config.out_lo;
    net.out_hi = config.out_hi;

    std::vector<int> dims;
    dims.push_back(config.input_dim);
    dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
    dims.push_back(config.output_dim);

    size_t offset = 0;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        LayerSpec spec;
        spec.in = dims[l];
        spec.out = dims[l + 1];
        const bool hidden = l + 2 < dims.size();
        spec.layer_norm = hidden && config.layer_norm;  // never on the output layer
        spec.w_off = offset;
        offset += static_cast<size_t>(spec.out) * spec.in;
        spec.b_off = offset;
        offset += spec.out;
        if (spec.layer_norm) {
            spec.gain_off = offset;
            offset += spec.out;
            spec.beta_off = offset;
            offset += spec.out;
        }
        net.layers.push_back(spec);
    }
    net.params.assign(offset, 0.0);

    for (size_t l = 0; l < net.layers.size(); ++l) {
        const LayerSpec& spec = net.layers[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.in));
        const double scale = (l + 1 == net.layers.size()) ? config.final_scale : 1.0;
        for (int i = 0; i < spec.out * spec.in; ++i) {
            net.params[spec.w_off + i] = scale * rng.uniform(-bound, bound);
        }
        // biases start at zero
        if (spec.layer_norm) {
            for (int i = 0; i < spec.out; ++i) {
                net.params[spec.gain_off + i] = 1.0;
            }
        }
    }
    return net;
}

GradBundle make_grad_bundle(const Mlp& net) {
    GradBundle grads;
    grads.params.assign(net.param_count(), 0.0);
    grads.input.assign(static_cast<size_t>(net.input_dim()), 0.0);
    return grads;
}

void mlp_forward_trace(const Mlp& net, std::span<const double> input, ForwardTrace& trace) {
    if (net.layers.empty()) {
        throw std::invalid_argument("mlp has no layers");
    }
    check_dim(static_cast<int>(input.size()), net.layers.front().in, 0, "input");

    trace.layers.resize(net.layers.size());

    for (size_t l = 0; l < net.layers.size(); ++l) {
        const LayerSpec& spec = net.layers[l];
        LayerTrace& lt = trace.layers[l];
        if (l == 0) {
            lt.input.assign(input.begin(), input.end());
        } else {
            lt.input = trace.layers[l - 1].activated;
        }

        lt.affine.assign(spec.out, 0.0);
        const double* w = net.params.data() + spec.w_off;
        const double* b = net.params.data() + spec.b_off;
        for (int o = 0; o < spec.out; ++o) {
            double acc = b[o];
            const double* row = w + static_cast<size_t>(o) * spec.in;
            for (int i = 0; i < spec.in; ++i) {
                acc += row[i] * lt.input[i];
            }
            lt.affine[o] = acc;
        }

        lt.activated.assign(spec.out, 0.0);
        if (l + 1 == net.layers.size()) {
            if (net.squash == Squash::tanh_bounds) {
                for (int o = 0; o < spec.out; ++o) {
                    const double center = 0.5 * (net.out_hi[o] + net.out_lo[o]);
                    const double half = 0.5 * (net.out_hi[o] - net.out_lo[o]);
                    lt.activated[o] = center + half * std::tanh(lt.affine[o]);
                }
            } else {
                lt.activated = lt.affine;
            }
            continue;
        }

        if (spec.layer_norm) {
            double mean = 0.0;
            for (double z : lt.affine) mean += z;
            mean /= spec.out;
            double var = 0.0;
            for (double z : lt.affine) var += (z - mean) * (z - mean);
            var /= spec.out;
            lt.inv_sigma = 1.0 / std::sqrt(var + kLayerNormEps);
            lt.normalized.assign(spec.out, 0.0);
            const double* gain = net.params.data() + spec.gain_off;
            const double* beta = net.params.data() + spec.beta_off;
            for (int o = 0; o < spec.out; ++o) {
                lt.normalized[o] = (lt.affine[o] - mean) * lt.inv_sigma;
                lt.activated[o] = std::max(0.0, gain[o] * lt.normalized[o] + beta[o]);
            }
        } else {
            for (int o = 0; o < spec.out; ++o) {
                lt.activated[o] = std::max(0.0, lt.affine[o]);
            }
        }
    }
}

Vec mlp_forward(const Mlp& net, std::span<const double> input) {
    ForwardTrace trace;
    mlp_forward_trace(net, input, trace);
    return trace.output();
}

void mlp_backward(const Mlp& net, const ForwardTrace& trace, std::span<const double> upstream,
                  GradBundle& grads) {
    check_dim(static_cast<int>(upstream.size()), net.output_dim(),
              static_cast<int>(net.layers.size()) - 1, "upstream gradient");
    if (grads.params.size() != net.param_count() ||
        grads.input.size() != static_cast<size_t>(net.input_dim())) {
        throw std::invalid_argument("grad bundle shape does not match network");
    }

    Vec d_out(upstream.begin(), upstream.end());

    for (size_t l = net.layers.size(); l-- > 0;) {
        const LayerSpec& spec = net.layers[l];
        const LayerTrace& lt = trace.layers[l];
        const bool last = l + 1 == net.layers.size();

        // activation backward, to the gradient at gain*y+beta (or at the
        // affine output when the layer has no norm)
        Vec d_pre(spec.out, 0.0);
        if (last) {
            if (net.squash == Squash::tanh_bounds) {
                for (int o = 0; o < spec.out; ++o) {
                    const double half = 0.5 * (net.out_hi[o] - net.out_lo[o]);
                    const double t = std::tanh(lt.affine[o]);
                    d_pre[o] = d_out[o] * half * (1.0 - t * t);
                }
            } else {
                d_pre = d_out;
            }
        } else {
            // ReLU gate: relu output is positive iff its input was
            for (int o = 0; o < spec.out; ++o) {
                d_pre[o] = lt.activated[o] > 0.0 ? d_out[o] : 0.0;
            }
        }

        // layer-norm backward: d_pre -> d_affine
        Vec d_affine;
        if (spec.layer_norm) {
            const double* gain = net.params.data() + spec.gain_off;
            Vec d_norm(spec.out, 0.0);
            for (int o = 0; o < spec.out; ++o) {
                grads.params[spec.gain_off + o] += d_pre[o] * lt.normalized[o];
                grads.params[spec.beta_off + o] += d_pre[o];
                d_norm[o] = d_pre[o] * gain[o];
            }
            double mean_dnorm = 0.0, mean_dnorm_y = 0.0;
            for (int o = 0; o < spec.out; ++o) {
                mean_dnorm += d_norm[o];
                mean_dnorm_y += d_norm[o] * lt.normalized[o];
            }
            mean_dnorm /= spec.out;
            mean_dnorm_y /= spec.out;
            d_affine.assign(spec.out, 0.0);
            for (int o = 0; o < spec.out; ++o) {
                d_affine[o] =
                    lt.inv_sigma * (d_norm[o] - mean_dnorm - lt.normalized[o] * mean_dnorm_y);
            }
        } else {
            d_affine = std::move(d_pre);
        }

        // affine backward
        const double* w = net.params.data() + spec.w_off;
        Vec d_input(spec.in, 0.0);
        for (int o = 0; o < spec.out; ++o) {
            const double g = d_affine[o];
            grads.params[spec.b_off + o] += g;
            double* w_grad_row =
                grads.params.data() + spec.w_off + static_cast<size_t>(o) * spec.in;
            const double* w_row = w + static_cast<size_t>(o) * spec.in;
            for (int i = 0; i < spec.in; ++i) {
                w_grad_row[i] += g * lt.input[i];
                d_input[i] += g * w_row[i];
            }
        }

        if (l == 0) {
            for (int i = 0; i < spec.in; ++i) {
                grads.input[i] += d_input[i];
            }
        } else {
            d_out = std::move(d_input);
        }
    }
}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw std::invalid_argument("adam: parameter/gradient size mismatch");
    }
    if (lr < 0.0) {
        throw std::invalid_argument("adam: learning rate must be non-negative");
    }
    for (double g : grads) {
        if (!std::isfinite(g)) {
            throw std::runtime_error("adam: non-finite gradient");
        }
    }
    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
    for (size_t i = 0; i < params.size(); ++i) {
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
        const double m_hat = m_[i] / bc1;
        const double v_hat = v_[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
}

double max_rel_err(std::span<const double> a, std::span<const double> b, double floor) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("max_rel_err: size mismatch");
    }
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(floor, std::abs(a[i]) + std::abs(b[i]));
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

}  // namespace cmp::nn
