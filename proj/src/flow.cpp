#include "flowcast/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "flowcast/errors.hpp"
#include "flowcast/kernels.hpp"
#include "flowcast/rng.hpp"

namespace flowcast::flow {

void VelocityField::validate() const {
    params.validate();
    if (params.input_dim() != state_dim() + nn::kTimeEmbedDim)
        throw ConfigError("velocity field input dim must be state dim + time features");
    if (norm.dim() != state_dim())
        throw ConfigError("velocity field norm stats dim must match state dim");
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    for (std::size_t h : hidden)
        if (h < 1) throw ConfigError("hidden widths must be >= 1");
}

std::vector<double> interpolate(std::span<const double> q0,
                                std::span<const double> q1, double t) {
    if (q0.size() != q1.size()) throw ShapeError("interpolate: dimension mismatch");
    std::vector<double> out(q0.size());
    kernels::lincomb(t, q1.data(), 1.0 - t, q0.data(), out.data(), out.size());
    return out;
}

namespace {

/// Shared minibatch loop. `fill_batch` appends interpolated rows for the
/// shuffled sample indices of one batch.
template <typename FillBatch>
TrainResult run_training(std::size_t n_samples, std::size_t state_dim,
                         const TrainConfig& cfg, FieldKind kind,
                         const NormStats& norm, double horizon,
                         FillBatch&& fill_batch) {
    cfg.validate();
    if (n_samples == 0) throw UsageError("training requires a non-empty dataset");

    std::vector<std::size_t> dims;
    dims.push_back(state_dim + nn::kTimeEmbedDim);
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(state_dim);

    TrainResult result;
    result.field.params = nn::init_params(dims, cfg.activation, cfg.seed);
    result.field.kind = kind;
    result.field.norm = norm;
    result.field.horizon = horizon;

    nn::OptState opt = nn::make_opt_state(result.field.params, cfg.lr);
    nn::Gradients grads = nn::make_gradients(result.field.params);
    nn::Batch batch;
    batch.state_dim = state_dim;
    batch.reserve(cfg.batch_size, state_dim);

    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), 0);

    result.epoch_loss.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng = Rng::derive(cfg.seed, epoch + 1);
        for (std::size_t i = n_samples; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.uniform() * i);
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < n_samples; start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, n_samples);
            batch.clear();
            batch.state_dim = state_dim;
            fill_batch(order, start, end, rng, batch);
            const double loss = nn::loss_and_grad(result.field.params, batch, grads);
            if (!std::isfinite(loss))
                throw Error("training diverged: non-finite loss at epoch " +
                            std::to_string(epoch + 1) + ", batch starting at sample " +
                            std::to_string(start));
            nn::adam_step(opt, result.field.params, grads);
            epoch_sum += loss * static_cast<double>(end - start);
        }
        result.epoch_loss.push_back(epoch_sum / static_cast<double>(n_samples));
    }
    return result;
}

}  // namespace

TrainResult train_forecast_flow(const dynamics::Dataset& dataset,
                                const TrainConfig& cfg) {
    if (dataset.count() == 0) throw UsageError("train_forecast_flow: empty dataset");
    const std::size_t dim = dataset.dim();
    NormStats norm = dataset.norm.dim() == dim ? dataset.norm : NormStats();
    if (norm.dim() != dim) {
        dynamics::Dataset tmp = dataset;
        tmp.refresh_norm();
        norm = tmp.norm;
    }

    // Normalize once up front; training touches only these copies.
    std::vector<double> q0n(dataset.count() * dim), qTn(dataset.count() * dim);
    for (std::size_t i = 0; i < dataset.count(); ++i) {
        auto a = norm.normalized(dataset.pairs[i].q0);
        auto b = norm.normalized(dataset.pairs[i].qT);
        std::copy(a.begin(), a.end(), q0n.begin() + i * dim);
        std::copy(b.begin(), b.end(), qTn.begin() + i * dim);
    }

    std::vector<double> qt(dim), target(dim);
    return run_training(
        dataset.count(), dim, cfg, FieldKind::forecast, norm, dataset.horizon,
        [&](const std::vector<std::size_t>& order, std::size_t start,
            std::size_t end, Rng& rng, nn::Batch& batch) {
            for (std::size_t s = start; s < end; ++s) {
                const std::size_t idx = order[s];
                const double* a = q0n.data() + idx * dim;
                const double* b = qTn.data() + idx * dim;
                const double t = rng.uniform();
                for (std::size_t d = 0; d < dim; ++d) {
                    qt[d] = t * b[d] + (1.0 - t) * a[d];
                    target[d] = b[d] - a[d];
                }
                batch.push(qt, t, target);
            }
        });
}

TrainResult train_gaussify_flow(const std::vector<std::vector<double>>& states,
                                const Shape& shape, const TrainConfig& cfg) {
    if (states.empty()) throw UsageError("train_gaussify_flow: empty state collection");
    const std::size_t dim = shape.size();
    std::vector<double> flat(states.size() * dim);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].size() != dim)
            throw ShapeError("train_gaussify_flow: state " + std::to_string(i) +
                             " has wrong dimension");
        std::copy(states[i].begin(), states[i].end(), flat.begin() + i * dim);
    }
    const NormStats norm = NormStats::fit(flat, dim);
    for (std::size_t i = 0; i < states.size(); ++i)
        norm.normalize(std::span(flat.begin() + i * dim, dim));

    std::vector<double> qt(dim), target(dim), z(dim);
    return run_training(
        states.size(), dim, cfg, FieldKind::gaussify, norm, 0.0,
        [&](const std::vector<std::size_t>& order, std::size_t start,
            std::size_t end, Rng& rng, nn::Batch& batch) {
            for (std::size_t s = start; s < end; ++s) {
                const double* a = flat.data() + order[s] * dim;
                for (std::size_t d = 0; d < dim; ++d) z[d] = rng.normal();
                const double t = rng.uniform();
                for (std::size_t d = 0; d < dim; ++d) {
                    qt[d] = (1.0 - t) * a[d] + t * z[d];
                    target[d] = z[d] - a[d];
                }
                batch.push(qt, t, target);
            }
        });
}

double fm_loss(const VelocityField& field, const nn::Batch& batch) {
    return nn::loss_only(field.params, batch);
}

std::vector<double> velocity(const VelocityField& field,
                             std::span<const double> q, double t) {
    if (q.size() != field.state_dim())
        throw ShapeError("velocity: state dimension mismatch");
    std::vector<double> out = nn::forward(field.params, field.norm.normalized(q), t);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] *= field.norm.stdev[d];
    return out;
}

io::Checkpoint to_checkpoint(const VelocityField& field) {
    io::Checkpoint ck;
    ck.kind = field.kind == FieldKind::forecast ? io::kKindForecast : io::kKindGaussify;
    ck.params = field.params;
    ck.norm = field.norm;
    ck.horizon = field.horizon;
    return ck;
}

VelocityField field_from_checkpoint(const io::Checkpoint& ck) {
    VelocityField f;
    if (ck.kind == io::kKindForecast) {
        f.kind = FieldKind::forecast;
    } else if (ck.kind == io::kKindGaussify) {
        f.kind = FieldKind::gaussify;
    } else {
        throw UsageError("checkpoint kind '" + ck.kind + "' is not a velocity field");
    }
    f.params = ck.params;
    f.norm = ck.norm;
    f.horizon = ck.horizon;
    f.validate();
    return f;
}

}  // namespace flowcast::flow
