#include "mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace slfd {

std::string activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    throw std::invalid_argument("unknown activation: " + name);
}

int Mlp::param_count_for(const std::vector<int>& widths) {
    int n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        n += widths[l] * widths[l + 1] + widths[l + 1];
    return n;
}

Mlp::Mlp(std::vector<int> widths, Activation act) : widths_(std::move(widths)), act_(act) {
    if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
    for (int w : widths_)
        if (w <= 0) throw std::invalid_argument("Mlp: widths must be positive");
    params_.assign(param_count_for(widths_), 0.0);
}

Mlp Mlp::create(std::vector<int> widths, Activation act, std::uint64_t seed) {
    Mlp net(std::move(widths), act);
    Rng rng(seed);
    std::size_t k = 0;
    for (std::size_t l = 0; l + 1 < net.widths_.size(); ++l) {
        int fan_in = net.widths_[l];
        int fan_out = net.widths_[l + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (int i = 0; i < fan_in * fan_out + fan_out; ++i)
            net.params_[k++] = rng.uniform(-bound, bound);
    }
    return net;
}

static double activate(Activation act, double x) {
    return act == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
    Trace trace;
    return forward(input, trace);
}

std::vector<double> Mlp::forward(std::span<const double> input, Trace& trace) const {
    if (input.size() != static_cast<std::size_t>(widths_.front()))
        throw std::invalid_argument("Mlp::forward: input length " + std::to_string(input.size()) +
                                    " does not match first layer width " + std::to_string(widths_.front()));
    std::size_t layers = widths_.size() - 1;
    trace.pre.assign(layers, {});
    trace.post.assign(layers, {});

    std::vector<double> cur(input.begin(), input.end());
    std::size_t k = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        int in_w = widths_[l];
        int out_w = widths_[l + 1];
        std::vector<double> next(out_w);
        const double* weights = params_.data() + k;
        const double* bias = weights + static_cast<std::size_t>(in_w) * out_w;
        for (int o = 0; o < out_w; ++o) {
            double acc = bias[o];
            const double* row = weights + static_cast<std::size_t>(o) * in_w;
            for (int i = 0; i < in_w; ++i) acc += row[i] * cur[i];
            next[o] = acc;
        }
        k += static_cast<std::size_t>(in_w) * out_w + out_w;
        trace.pre[l] = next;
        if (l + 1 < layers)
            for (double& x : next) x = activate(act_, x);
        trace.post[l] = next;
        cur = std::move(next);
    }
    return cur;
}

void Mlp::backward(std::span<const double> input, const Trace& trace,
                   std::span<const double> output_grad, std::span<double> grad) const {
    std::size_t layers = widths_.size() - 1;
    if (trace.pre.size() != layers)
        throw std::invalid_argument("Mlp::backward: trace does not match network depth");
    if (output_grad.size() != static_cast<std::size_t>(widths_.back()))
        throw std::invalid_argument("Mlp::backward: output gradient size mismatch");
    if (grad.size() != params_.size())
        throw std::invalid_argument("Mlp::backward: gradient buffer size mismatch");

    // layer parameter offsets
    std::vector<std::size_t> offset(layers);
    std::size_t k = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offset[l] = k;
        k += static_cast<std::size_t>(widths_[l]) * widths_[l + 1] + widths_[l + 1];
    }

    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (std::size_t li = layers; li-- > 0;) {
        int in_w = widths_[li];
        int out_w = widths_[li + 1];
        // delta currently holds dL/d(post-activation of layer li); convert to
        // dL/d(pre-activation). The output layer is linear.
        if (li + 1 < layers) {
            for (int o = 0; o < out_w; ++o) {
                double pre = trace.pre[li][o];
                if (act_ == Activation::Tanh) {
                    double t = std::tanh(pre);
                    delta[o] *= 1.0 - t * t;
                } else {
                    delta[o] *= pre > 0.0 ? 1.0 : 0.0;
                }
            }
        }
        const std::vector<double>* below = li == 0 ? nullptr : &trace.post[li - 1];
        double* wgrad = grad.data() + offset[li];
        double* bgrad = wgrad + static_cast<std::size_t>(in_w) * out_w;
        for (int o = 0; o < out_w; ++o) {
            double d = delta[o];
            double* row = wgrad + static_cast<std::size_t>(o) * in_w;
            for (int i = 0; i < in_w; ++i)
                row[i] += d * (below ? (*below)[i] : input[i]);
            bgrad[o] += d;
        }
        if (li == 0) break;
        const double* weights = params_.data() + offset[li];
        std::vector<double> prev(in_w, 0.0);
        for (int o = 0; o < out_w; ++o) {
            const double* row = weights + static_cast<std::size_t>(o) * in_w;
            for (int i = 0; i < in_w; ++i) prev[i] += row[i] * delta[o];
        }
        delta = std::move(prev);
    }
}

void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> grad) {
    if (grad.size() != params.size() || state.m.size() != params.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    for (double g : grad)
        if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient entry");
    state.step += 1;
    double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        double mhat = state.m[i] / b1t;
        double vhat = state.v[i] / b2t;
        params[i] -= state.step_size * mhat / (std::sqrt(vhat) + state.eps);
    }
}

double l2_penalty(std::span<const double> params, double weight, std::span<double> grad) {
    double sq = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        sq += params[i] * params[i];
        if (!grad.empty()) grad[i] += 2.0 * weight * params[i];
    }
    return weight * sq;
}

} // namespace slfd
