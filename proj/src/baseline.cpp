#include "flowcast/baseline.hpp"

#include <cmath>

#include "flowcast/errors.hpp"

namespace flowcast::baseline {

void VarModel::validate() const {
    if (dim == 0 || a.size() != dim * dim || b.size() != dim)
        throw ShapeError("VAR model has inconsistent shapes");
    for (double v : a)
        if (!std::isfinite(v)) throw ConfigError("VAR model has non-finite entries");
    for (double v : b)
        if (!std::isfinite(v)) throw ConfigError("VAR model has non-finite entries");
}

namespace {

/// Solves G x = rhs (n x n, row-major) by Gaussian elimination with partial
/// pivoting; returns false on a vanishing pivot.
bool solve_inplace(std::vector<double> g, std::vector<double> rhs, std::size_t n,
                   std::vector<double>& out) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(g[r * n + col]) > std::fabs(g[piv * n + col])) piv = r;
        if (std::fabs(g[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(g[col * n + c], g[piv * n + c]);
            std::swap(rhs[col], rhs[piv]);
        }
        const double inv = 1.0 / g[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = g[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) g[r * n + c] -= f * g[col * n + c];
            rhs[r] -= f * rhs[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= g[r * n + c] * out[c];
        out[r] = acc / g[r * n + r];
    }
    for (double v : out)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

VarModel var_fit(const dynamics::Dataset& dataset, bool with_intercept) {
    const std::size_t d = dataset.dim();
    if (d == 0) throw UsageError("var_fit: empty state dimension");
    if (dataset.count() < d + 1)
        throw UsageError("var_fit: need at least dim + 1 pairs, got " +
                         std::to_string(dataset.count()));

    const std::size_t n = with_intercept ? d + 1 : d;  // design width

    // Normal equations: G = X^T X, R = X^T Y with X rows [q0 (, 1)].
    std::vector<double> gram(n * n, 0.0);
    std::vector<double> rhs(n * d, 0.0);
    std::vector<double> row(n, 1.0);
    for (const auto& pr : dataset.pairs) {
        if (pr.q0.size() != d || pr.qT.size() != d)
            throw ShapeError("var_fit: pair dimension mismatch");
        for (std::size_t i = 0; i < d; ++i) row[i] = pr.q0[i];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) gram[i * n + j] += row[i] * row[j];
            for (std::size_t k = 0; k < d; ++k) rhs[i * d + k] += row[i] * pr.qT[k];
        }
    }

    VarModel model;
    model.dim = d;
    model.a.assign(d * d, 0.0);
    model.b.assign(d, 0.0);
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> g = gram;
        if (attempt == 1) {
            const double lambda = 1e-8;
            for (std::size_t i = 0; i < n; ++i) g[i * n + i] += lambda;
        }
        bool ok = true;
        for (std::size_t k = 0; k < d && ok; ++k) {
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = rhs[i * d + k];
            std::vector<double> beta;
            ok = solve_inplace(g, col, n, beta);
            if (!ok) break;
            for (std::size_t j = 0; j < d; ++j) model.a[k * d + j] = beta[j];
            model.b[k] = with_intercept ? beta[d] : 0.0;
        }
        if (ok) {
            model.validate();
            return model;
        }
    }
    throw Error("var_fit: design matrix is rank deficient even after ridge fallback");
}

std::vector<double> var_apply(const VarModel& model, std::span<const double> q) {
    if (q.size() != model.dim) throw ShapeError("var_apply: dimension mismatch");
    std::vector<double> out(model.dim);
    for (std::size_t r = 0; r < model.dim; ++r) {
        double acc = model.b[r];
        const double* row = model.a.data() + r * model.dim;
        for (std::size_t c = 0; c < model.dim; ++c) acc += row[c] * q[c];
        out[r] = acc;
    }
    return out;
}

Ensemble var_predict(const VarModel& model, const Ensemble& e0) {
    e0.validate();
    if (e0.dim() != model.dim)
        throw ShapeError("var_predict: ensemble dimension mismatch");
    Ensemble out;
    out.shape = e0.shape;
    out.meta = e0.meta;
    out.meta.source = "var";
    out.members.reserve(e0.size());
    for (const auto& m : e0.members) out.members.push_back(var_apply(model, m));
    return out;
}

Ensemble var_rollout(const VarModel& model, const Ensemble& e0,
                     std::size_t applications) {
    if (applications < 1) throw UsageError("var_rollout: need at least one application");
    Ensemble out = e0;
    for (std::size_t k = 0; k < applications; ++k) {
        for (auto& m : out.members) m = var_apply(model, m);
    }
    out.meta.source = "var-rollout";
    for (std::size_t i = 0; i < out.size(); ++i)
        for (double v : out.members[i])
            if (!std::isfinite(v))
                throw DivergenceError("var_rollout: member " + std::to_string(i) +
                                      " diverged");
    return out;
}

io::Checkpoint var_to_checkpoint(const VarModel& model) {
    model.validate();
    io::Checkpoint ck;
    ck.kind = io::kKindVar;
    ck.params.layer_dims = {model.dim, model.dim};
    ck.params.weights = {model.a};
    ck.params.biases = {model.b};
    ck.params.activation = nn::Activation::tanh;  // unused: single linear layer
    ck.norm = NormStats::identity(model.dim);
    return ck;
}

VarModel var_from_checkpoint(const io::Checkpoint& ck) {
    if (ck.kind != io::kKindVar)
        throw UsageError("checkpoint kind '" + ck.kind + "' is not a VAR model");
    if (ck.params.layer_dims.size() != 2 ||
        ck.params.layer_dims[0] != ck.params.layer_dims[1])
        throw IoError("VAR checkpoint must hold a single square layer");
    VarModel m;
    m.dim = ck.params.layer_dims[0];
    m.a = ck.params.weights[0];
    m.b = ck.params.biases[0];
    m.validate();
    return m;
}

}  // namespace flowcast::baseline
