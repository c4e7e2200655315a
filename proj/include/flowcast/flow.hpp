#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowcast/dynamics.hpp"
#include "flowcast/io.hpp"
#include "flowcast/nn.hpp"
#include "flowcast/normalize.hpp"
#include "flowcast/shape.hpp"

namespace flowcast::flow {

enum class FieldKind { forecast, gaussify };

/// A trained velocity field plus everything inference needs to reproduce
/// the training-time normalization.
struct VelocityField {
    nn::ModelParams params;
    FieldKind kind = FieldKind::forecast;
    NormStats norm;
    double horizon = 0.0;  // forecast fields only

    std::size_t state_dim() const { return params.output_dim(); }
    void validate() const;
};

struct TrainConfig {
    double lr = 1e-4;
    std::size_t batch_size = 64;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{128, 128, 128};
    nn::Activation activation = nn::Activation::tanh;

    void validate() const;
};

/// Linear interpolant q_t = t q1 + (1 - t) q0; its velocity is q1 - q0.
std::vector<double> interpolate(std::span<const double> q0,
                                std::span<const double> q1, double t);

struct TrainResult {
    VelocityField field;
    std::vector<double> epoch_loss;  // mean training loss per epoch
};

/// Minibatch velocity regression on normalized (q0, qT) pairs: sample a
/// pair batch, draw one t ~ U(0,1) per sample, interpolate, regress the
/// net onto qT - q0. Deterministic given cfg.seed.
TrainResult train_forecast_flow(const dynamics::Dataset& dataset,
                                const TrainConfig& cfg);

/// Same loop against z ~ N(0, I): interpolate (1-t) q0 + t z and regress
/// onto z - q0. The returned field encodes states into the latent Gaussian.
TrainResult train_gaussify_flow(const std::vector<std::vector<double>>& states,
                                const Shape& shape, const TrainConfig& cfg);

/// Evaluation-only velocity loss; matches nn::loss_and_grad on the same
/// batch exactly.
double fm_loss(const VelocityField& field, const nn::Batch& batch);

/// Velocity in original units at an original-space point.
std::vector<double> velocity(const VelocityField& field,
                             std::span<const double> q, double t);

io::Checkpoint to_checkpoint(const VelocityField& field);
VelocityField field_from_checkpoint(const io::Checkpoint& ck);

}  // namespace flowcast::flow
