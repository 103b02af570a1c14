#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace slfd {

enum class Activation { Tanh, Relu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Fully connected network with a flat parameter vector and a fixed layout:
// for each layer, weight matrix row-major (out x in) followed by bias (out).
// Hidden layers use the configured activation, the output layer is linear.
// Forward is deterministic given (params, input).
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<int> widths, Activation act);

    // Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    static Mlp create(std::vector<int> widths, Activation act, std::uint64_t seed);

    const std::vector<int>& widths() const { return widths_; }
    Activation activation() const { return act_; }
    int input_dim() const { return widths_.front(); }
    int output_dim() const { return widths_.back(); }
    int param_count() const { return static_cast<int>(params_.size()); }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::vector<double> forward(std::span<const double> input) const;

    // Records pre-activations so backward can be run for the same input.
    struct Trace {
        std::vector<std::vector<double>> pre;  // per layer, before activation
        std::vector<std::vector<double>> post; // per layer, after activation
    };
    std::vector<double> forward(std::span<const double> input, Trace& trace) const;

    // Accumulates d(loss)/d(params) into grad (size param_count) given the
    // cotangent d(loss)/d(output). Call with the trace from forward on the
    // same input.
    void backward(std::span<const double> input, const Trace& trace,
                  std::span<const double> output_grad, std::span<double> grad) const;

    static int param_count_for(const std::vector<int>& widths);

private:
    std::vector<int> widths_;
    Activation act_ = Activation::Tanh;
    std::vector<double> params_;
};

// First-order adaptive-moment optimizer state.
struct AdamState {
    double step_size = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(std::size_t n, double lr = 1e-3)
        : step_size(lr), m(n, 0.0), v(n, 0.0) {}
};

// One optimizer update in place. Throws on non-finite gradient entries.
void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> grad);

// weight * ||theta||^2 and its gradient contribution (2 * weight * theta).
double l2_penalty(std::span<const double> params, double weight, std::span<double> grad);

} // namespace slfd
