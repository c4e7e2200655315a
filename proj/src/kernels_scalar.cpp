#include "flowcast/kernels.hpp"

#include <cmath>

namespace flowcast::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void lincomb_scalar(double a, const double* x, double b, const double* y,
                    double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void matvec_scalar(const double* w, const double* x, const double* bias,
                   double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? bias[r] : 0.0;
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

void matvec_t_scalar(const double* w, const double* d, double* out,
                     std::size_t rows, std::size_t cols) {
    for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        const double dr = d[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] += dr * row[c];
    }
}

void ger_scalar(double alpha, const double* d, const double* x, double* w,
                std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = w + r * cols;
        const double adr = alpha * d[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += adr * x[c];
    }
}

void adam_scalar(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double bc1, double bc2,
                 double beta1, double beta2, double eps) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
    }
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

constexpr Ops kScalarOps = {
    "scalar",
    dot_scalar,
    axpy_scalar,
    lincomb_scalar,
    matvec_scalar,
    matvec_t_scalar,
    ger_scalar,
    adam_scalar,
    sum_scalar,
    sumsq_scalar,
    sum_sq_diff_scalar,
    sum_abs_diff_scalar,
};

}  // namespace

const Ops& scalar() { return kScalarOps; }

}  // namespace flowcast::kernels
