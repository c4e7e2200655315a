#include "flowcast/nn.hpp"

#include <cmath>
#include <numbers>

#include "flowcast/errors.hpp"
#include "flowcast/kernels.hpp"
#include "flowcast/rng.hpp"

namespace flowcast::nn {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double activate(Activation a, double z) {
    if (a == Activation::tanh) return std::tanh(z);
    return z / (1.0 + std::exp(-z));  // silu
}

/// Derivative of the activation from the preactivation z.
inline double activate_deriv(Activation a, double z) {
    if (a == Activation::tanh) {
        const double th = std::tanh(z);
        return 1.0 - th * th;
    }
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 + z * (1.0 - s));
}

/// Scratch space for one forward/backward sweep, reused across a batch.
struct Workspace {
    std::vector<std::vector<double>> act;  // act[0] = input, act[k+1] = layer k output
    std::vector<std::vector<double>> pre;  // pre[k] = preactivation of layer k
    std::vector<double> delta, delta_next;

    explicit Workspace(const ModelParams& p) {
        act.resize(p.layer_count() + 1);
        pre.resize(p.layer_count());
        act[0].resize(p.input_dim());
        std::size_t widest = 0;
        for (std::size_t k = 0; k < p.layer_count(); ++k) {
            act[k + 1].resize(p.layer_dims[k + 1]);
            pre[k].resize(p.layer_dims[k + 1]);
            widest = std::max(widest, p.layer_dims[k + 1]);
        }
        delta.resize(widest);
        delta_next.resize(widest);
    }
};

void forward_sweep(const ModelParams& p, Workspace& ws) {
    const std::size_t L = p.layer_count();
    for (std::size_t k = 0; k < L; ++k) {
        const std::size_t rows = p.layer_dims[k + 1];
        const std::size_t cols = p.layer_dims[k];
        kernels::matvec(p.weights[k].data(), ws.act[k].data(), p.biases[k].data(),
                        ws.pre[k].data(), rows, cols);
        if (k + 1 < L) {
            for (std::size_t r = 0; r < rows; ++r)
                ws.act[k + 1][r] = activate(p.activation, ws.pre[k][r]);
        } else {
            ws.act[k + 1] = ws.pre[k];  // identity output layer
        }
    }
}

}  // namespace

std::string activation_name(Activation a) {
    return a == Activation::tanh ? "tanh" : "silu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "silu") return Activation::silu;
    throw ConfigError("unknown activation '" + name + "' (use tanh or silu)");
}

void time_embedding(double t, double* out) {
    out[0] = t;
    out[1] = std::sin(2.0 * std::numbers::pi * t);
    out[2] = std::cos(2.0 * std::numbers::pi * t);
}

std::size_t ModelParams::param_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < layer_count(); ++k)
        n += weights[k].size() + biases[k].size();
    return n;
}

void ModelParams::validate() const {
    if (layer_dims.size() < 2) throw ConfigError("network needs at least 2 layer dims");
    for (std::size_t d : layer_dims)
        if (d < 1) throw ConfigError("layer dims must be >= 1");
    if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size())
        throw ConfigError("layer count does not match layer_dims");
    for (std::size_t k = 0; k < layer_count(); ++k) {
        if (weights[k].size() != layer_dims[k + 1] * layer_dims[k])
            throw ConfigError("weight block " + std::to_string(k) + " has wrong shape");
        if (biases[k].size() != layer_dims[k + 1])
            throw ConfigError("bias block " + std::to_string(k) + " has wrong shape");
        if (!all_finite(weights[k]) || !all_finite(biases[k]))
            throw ConfigError("non-finite parameter in layer " + std::to_string(k));
    }
}

ModelParams init_params(const std::vector<std::size_t>& layer_dims,
                        Activation activation, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw ConfigError("init_params: need at least 2 layer dims");
    for (std::size_t d : layer_dims)
        if (d < 1) throw ConfigError("init_params: layer dims must be >= 1");

    ModelParams p;
    p.layer_dims = layer_dims;
    p.activation = activation;
    p.weights.resize(layer_dims.size() - 1);
    p.biases.resize(layer_dims.size() - 1);
    for (std::size_t k = 0; k < p.layer_count(); ++k) {
        const std::size_t rows = layer_dims[k + 1];
        const std::size_t cols = layer_dims[k];
        const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
        Rng rng = Rng::derive(seed, k);
        p.weights[k].resize(rows * cols);
        for (double& w : p.weights[k]) w = rng.uniform(-scale, scale);
        p.biases[k].assign(rows, 0.0);
    }
    return p;
}

std::vector<double> forward_input(const ModelParams& params,
                                  std::span<const double> x) {
    if (x.size() != params.input_dim())
        throw ShapeError("forward: input has " + std::to_string(x.size()) +
                         " entries, network expects " + std::to_string(params.input_dim()));
    Workspace ws(params);
    std::copy(x.begin(), x.end(), ws.act[0].begin());
    forward_sweep(params, ws);
    return ws.act.back();
}

std::vector<double> forward(const ModelParams& params,
                            std::span<const double> q, double t) {
    if (q.size() + kTimeEmbedDim != params.input_dim())
        throw ShapeError("forward: state has " + std::to_string(q.size()) +
                         " entries, network expects " +
                         std::to_string(params.input_dim() - kTimeEmbedDim));
    Workspace ws(params);
    std::copy(q.begin(), q.end(), ws.act[0].begin());
    time_embedding(t, ws.act[0].data() + q.size());
    forward_sweep(params, ws);
    return ws.act.back();
}

void Gradients::zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

Gradients make_gradients(const ModelParams& params) {
    Gradients g;
    g.weights.resize(params.layer_count());
    g.biases.resize(params.layer_count());
    for (std::size_t k = 0; k < params.layer_count(); ++k) {
        g.weights[k].assign(params.weights[k].size(), 0.0);
        g.biases[k].assign(params.biases[k].size(), 0.0);
    }
    return g;
}

void Batch::reserve(std::size_t n, std::size_t dim) {
    inputs.reserve(n * dim);
    times.reserve(n);
    targets.reserve(n * dim);
}

void Batch::clear() {
    count = 0;
    inputs.clear();
    times.clear();
    targets.clear();
}

void Batch::push(std::span<const double> q, double t, std::span<const double> u) {
    if (state_dim == 0) state_dim = q.size();
    if (q.size() != state_dim || u.size() != state_dim)
        throw ShapeError("Batch::push: inconsistent state dims");
    inputs.insert(inputs.end(), q.begin(), q.end());
    targets.insert(targets.end(), u.begin(), u.end());
    times.push_back(t);
    ++count;
}

namespace {

double loss_impl(const ModelParams& params, const Batch& batch, Gradients* grads) {
    if (batch.count == 0) throw UsageError("empty batch");
    if (batch.state_dim + kTimeEmbedDim != params.input_dim() ||
        batch.state_dim != params.output_dim())
        throw ShapeError("batch state dim " + std::to_string(batch.state_dim) +
                         " does not match network");

    const std::size_t L = params.layer_count();
    const std::size_t dim = batch.state_dim;
    const double inv_count = 1.0 / static_cast<double>(batch.count);
    Workspace ws(params);
    if (grads) grads->zero();

    double loss = 0.0;
    for (std::size_t i = 0; i < batch.count; ++i) {
        const double* q = batch.inputs.data() + i * dim;
        const double* u = batch.targets.data() + i * dim;
        std::copy(q, q + dim, ws.act[0].begin());
        time_embedding(batch.times[i], ws.act[0].data() + dim);
        forward_sweep(params, ws);

        const std::vector<double>& out = ws.act[L];
        loss += inv_count * kernels::sum_sq_diff(out.data(), u, dim);
        if (!grads) continue;

        // dL/dout = (2/B) (out - u); walk layers backwards.
        for (std::size_t r = 0; r < dim; ++r)
            ws.delta[r] = 2.0 * inv_count * (out[r] - u[r]);
        for (std::size_t k = L; k-- > 0;) {
            const std::size_t rows = params.layer_dims[k + 1];
            const std::size_t cols = params.layer_dims[k];
            kernels::ger(1.0, ws.delta.data(), ws.act[k].data(),
                         grads->weights[k].data(), rows, cols);
            kernels::axpy(1.0, ws.delta.data(), grads->biases[k].data(), rows);
            if (k == 0) break;
            kernels::matvec_t(params.weights[k].data(), ws.delta.data(),
                              ws.delta_next.data(), rows, cols);
            for (std::size_t c = 0; c < cols; ++c)
                ws.delta[c] = ws.delta_next[c] *
                              activate_deriv(params.activation, ws.pre[k - 1][c]);
        }
    }
    return loss;
}

}  // namespace

double loss_and_grad(const ModelParams& params, const Batch& batch, Gradients& grads) {
    return loss_impl(params, batch, &grads);
}

double loss_only(const ModelParams& params, const Batch& batch) {
    return loss_impl(params, batch, nullptr);
}

OptState make_opt_state(const ModelParams& params, double lr) {
    if (lr <= 0.0) throw ConfigError("learning rate must be positive");
    OptState s;
    s.lr = lr;
    s.m_w.resize(params.layer_count());
    s.v_w.resize(params.layer_count());
    s.m_b.resize(params.layer_count());
    s.v_b.resize(params.layer_count());
    for (std::size_t k = 0; k < params.layer_count(); ++k) {
        s.m_w[k].assign(params.weights[k].size(), 0.0);
        s.v_w[k].assign(params.weights[k].size(), 0.0);
        s.m_b[k].assign(params.biases[k].size(), 0.0);
        s.v_b[k].assign(params.biases[k].size(), 0.0);
    }
    return s;
}

void adam_step(OptState& opt, ModelParams& params, const Gradients& grads) {
    if (opt.m_w.size() != params.layer_count())
        throw ShapeError("adam_step: optimizer state does not match network");
    opt.step_count += 1;
    const double t = static_cast<double>(opt.step_count);
    const double bc1 = 1.0 / (1.0 - std::pow(opt.beta1, t));
    const double bc2 = 1.0 / (1.0 - std::pow(opt.beta2, t));
    const auto& update = kernels::active().adam;
    for (std::size_t k = 0; k < params.layer_count(); ++k) {
        if (grads.weights[k].size() != params.weights[k].size() ||
            grads.biases[k].size() != params.biases[k].size())
            throw ShapeError("adam_step: gradient shapes do not match network");
        update(params.weights[k].data(), opt.m_w[k].data(), opt.v_w[k].data(),
               grads.weights[k].data(), params.weights[k].size(), opt.lr, bc1,
               bc2, opt.beta1, opt.beta2, opt.eps);
        update(params.biases[k].data(), opt.m_b[k].data(), opt.v_b[k].data(),
               grads.biases[k].data(), params.biases[k].size(), opt.lr, bc1,
               bc2, opt.beta1, opt.beta2, opt.eps);
    }
}

}  // namespace flowcast::nn
