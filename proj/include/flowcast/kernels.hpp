#pragma once

#include <cstddef>
#include <string>

namespace flowcast::kernels {

/// Table of the arithmetic inner loops everything else is built from.
/// Two implementations exist: a scalar reference and an AVX2+FMA variant.
/// The active table is chosen once at startup from CPU features; the
/// FLOWCAST_KERNELS environment variable ("scalar" or "avx2") overrides.
///
/// Reductions may reassociate, so the two tables agree to rounding error,
/// not bitwise; the equivalence tests pin the tolerance. Within one process
/// the selection is fixed, which keeps every run reproducible.
struct Ops {
    const char* name;

    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// out = a * x + b * y  (aliasing with x or y is allowed)
    void (*lincomb)(double a, const double* x, double b, const double* y,
                    double* out, std::size_t n);
    /// out = W x + bias, W row-major rows x cols; bias may be null.
    void (*matvec)(const double* w, const double* x, const double* bias,
                   double* out, std::size_t rows, std::size_t cols);
    /// out = W^T d, W row-major rows x cols, d length rows, out length cols.
    void (*matvec_t)(const double* w, const double* d, double* out,
                     std::size_t rows, std::size_t cols);
    /// W += alpha * d x^T (rank-1 update), W row-major rows x cols.
    void (*ger)(double alpha, const double* d, const double* x, double* w,
                std::size_t rows, std::size_t cols);
    /// Bias-corrected Adam update on one parameter block:
    ///   m = beta1 m + (1-beta1) g
    ///   v = beta2 v + (1-beta2) g^2
    ///   p -= lr * (m * bc1) / (sqrt(v * bc2) + eps)
    /// with bc1 = 1/(1-beta1^t), bc2 = 1/(1-beta2^t) precomputed by the caller.
    void (*adam)(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double bc1, double bc2,
                 double beta1, double beta2, double eps);
    /// sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    /// sum_i x[i]^2
    double (*sumsq)(const double* x, std::size_t n);
    /// sum_i (a[i] - b[i])^2
    double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
    /// sum_i |a[i] - b[i]|
    double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
};

/// Scalar reference table; always available.
const Ops& scalar();

/// AVX2+FMA table, or nullptr when the binary or CPU lacks it.
const Ops* avx2();

/// The table picked at startup (env override, then CPU detection).
const Ops& active();

/// Name of the active table ("scalar" / "avx2").
std::string active_name();

// Convenience forwarders through the active table.
inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}
inline void lincomb(double a, const double* x, double b, const double* y,
                    double* out, std::size_t n) {
    active().lincomb(a, x, b, y, out, n);
}
inline void matvec(const double* w, const double* x, const double* bias,
                   double* out, std::size_t rows, std::size_t cols) {
    active().matvec(w, x, bias, out, rows, cols);
}
inline void matvec_t(const double* w, const double* d, double* out,
                     std::size_t rows, std::size_t cols) {
    active().matvec_t(w, d, out, rows, cols);
}
inline void ger(double alpha, const double* d, const double* x, double* w,
                std::size_t rows, std::size_t cols) {
    active().ger(alpha, d, x, w, rows, cols);
}
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline double sumsq(const double* x, std::size_t n) { return active().sumsq(x, n); }
inline double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    return active().sum_sq_diff(a, b, n);
}
inline double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    return active().sum_abs_diff(a, b, n);
}

}  // namespace flowcast::kernels
