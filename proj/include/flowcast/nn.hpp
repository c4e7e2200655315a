#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flowcast::nn {

enum class Activation { tanh, silu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Width of the time features appended to the state: [t, sin 2*pi*t, cos 2*pi*t].
inline constexpr std::size_t kTimeEmbedDim = 3;

/// Writes the time features for t into out[0..2].
void time_embedding(double t, double* out);

/// Dense feed-forward network parameters. weights[k] is row-major
/// layer_dims[k+1] x layer_dims[k]; hidden layers use `activation`, the
/// output layer is identity.
struct ModelParams {
    std::vector<std::size_t> layer_dims;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    Activation activation = Activation::tanh;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
    std::size_t param_count() const;

    /// Throws ConfigError if shapes are inconsistent or values non-finite.
    void validate() const;
};

/// Weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.
/// Deterministic given seed (per-layer substreams).
ModelParams init_params(const std::vector<std::size_t>& layer_dims,
                        Activation activation, std::uint64_t seed);

/// Evaluates the network on a raw input vector (no time features).
std::vector<double> forward_input(const ModelParams& params,
                                  std::span<const double> x);

/// Evaluates the network on [q, time_embedding(t)]. Pure; q must have
/// input_dim() - kTimeEmbedDim entries.
std::vector<double> forward(const ModelParams& params,
                            std::span<const double> q, double t);

/// Per-parameter gradients, same shapes as ModelParams.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void zero();
};

Gradients make_gradients(const ModelParams& params);

/// A batch of (q_t, t, u_target) rows for the velocity-matching loss.
/// Row i of `inputs` is the state portion only; the time features are
/// appended internally during evaluation.
struct Batch {
    std::size_t count = 0;
    std::size_t state_dim = 0;
    std::vector<double> inputs;   // count x state_dim
    std::vector<double> times;    // count
    std::vector<double> targets;  // count x state_dim

    void reserve(std::size_t n, std::size_t dim);
    void clear();
    void push(std::span<const double> q, double t, std::span<const double> u);
};

/// Mean over the batch of ||net(q_t, t) - u_target||^2, with exact
/// reverse-mode gradients accumulated into `grads` (overwritten).
double loss_and_grad(const ModelParams& params, const Batch& batch,
                     Gradients& grads);

/// Loss only; same definition and reduction as loss_and_grad.
double loss_only(const ModelParams& params, const Batch& batch);

/// Adam optimizer state; moments mirror the parameter shapes.
struct OptState {
    std::vector<std::vector<double>> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::uint64_t step_count = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

OptState make_opt_state(const ModelParams& params, double lr);

/// One bias-corrected Adam step; increments step_count by exactly 1.
void adam_step(OptState& opt, ModelParams& params, const Gradients& grads);

}  // namespace flowcast::nn
