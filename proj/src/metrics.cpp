#include "flowcast/metrics.hpp"

#include <cmath>
#include <sstream>

#include "flowcast/errors.hpp"
#include "flowcast/kernels.hpp"

namespace flowcast::metrics {

std::vector<double> ensemble_mean_state(const Ensemble& e) {
    e.validate();
    const std::size_t d = e.dim();
    std::vector<double> mean(d, 0.0);
    for (const auto& m : e.members) kernels::axpy(1.0, m.data(), mean.data(), d);
    const double inv = 1.0 / static_cast<double>(e.size());
    for (double& v : mean) v *= inv;
    return mean;
}

std::vector<double> ensemble_sd_state(const Ensemble& e) {
    const std::vector<double> mean = ensemble_mean_state(e);
    const std::size_t d = e.dim();
    std::vector<double> var(d, 0.0);
    std::vector<double> diff(d);
    for (const auto& m : e.members) {
        kernels::lincomb(1.0, m.data(), -1.0, mean.data(), diff.data(), d);
        for (std::size_t i = 0; i < d; ++i) var[i] += diff[i] * diff[i];
    }
    const double inv = 1.0 / static_cast<double>(e.size());
    for (double& v : var) v = std::sqrt(v * inv);
    return var;
}

double mean_score(const Ensemble& e) {
    e.validate();
    double acc = 0.0;
    for (const auto& m : e.members) acc += kernels::sum(m.data(), m.size());
    return acc / (static_cast<double>(e.size()) * static_cast<double>(e.dim()));
}

double std_score(const Ensemble& e) {
    const double mean = mean_score(e);
    double acc = 0.0;
    for (const auto& m : e.members)
        for (double v : m) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / (static_cast<double>(e.size()) * static_cast<double>(e.dim())));
}

double mse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("mse: dimension mismatch");
    if (a.empty()) throw UsageError("mse: empty states");
    return kernels::sum_sq_diff(a.data(), b.data(), a.size()) /
           static_cast<double>(a.size());
}

double mae(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("mae: dimension mismatch");
    if (a.empty()) throw UsageError("mae: empty states");
    return kernels::sum_abs_diff(a.data(), b.data(), a.size()) /
           static_cast<double>(a.size());
}

bool ssim_defined(const Shape& shape) {
    return shape.is_grid() && shape.h >= kSsimWindow && shape.w >= kSsimWindow;
}

double ssim(std::span<const double> a, std::span<const double> b,
            const Shape& shape, double dynamic_range) {
    if (a.size() != b.size() || a.size() != shape.size())
        throw ShapeError("ssim: dimension mismatch");
    if (shape.h < kSsimWindow || shape.w < kSsimWindow)
        throw UsageError("ssim: grid smaller than one " +
                         std::to_string(kSsimWindow) + "x" +
                         std::to_string(kSsimWindow) + " window");

    const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
    const std::size_t win = kSsimWindow;
    const std::size_t np = win * win;

    double acc = 0.0;
    std::size_t windows = 0;
    for (std::uint32_t ch = 0; ch < shape.c; ++ch) {
        const double* xa = a.data() + static_cast<std::size_t>(ch) * shape.h * shape.w;
        const double* xb = b.data() + static_cast<std::size_t>(ch) * shape.h * shape.w;
        for (std::uint32_t by = 0; by + win <= shape.h; by += win) {
            for (std::uint32_t bx = 0; bx + win <= shape.w; bx += win) {
                double sum_a = 0.0, sum_b = 0.0;
                for (std::size_t y = 0; y < win; ++y) {
                    const double* ra = xa + (by + y) * shape.w + bx;
                    const double* rb = xb + (by + y) * shape.w + bx;
                    sum_a += kernels::sum(ra, win);
                    sum_b += kernels::sum(rb, win);
                }
                const double mu_a = sum_a / static_cast<double>(np);
                const double mu_b = sum_b / static_cast<double>(np);
                double var_a = 0.0, var_b = 0.0, cov = 0.0;
                for (std::size_t y = 0; y < win; ++y) {
                    const double* ra = xa + (by + y) * shape.w + bx;
                    const double* rb = xb + (by + y) * shape.w + bx;
                    for (std::size_t x = 0; x < win; ++x) {
                        const double da = ra[x] - mu_a;
                        const double db = rb[x] - mu_b;
                        var_a += da * da;
                        var_b += db * db;
                        cov += da * db;
                    }
                }
                var_a /= static_cast<double>(np);
                var_b /= static_cast<double>(np);
                cov /= static_cast<double>(np);
                const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
                const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
                acc += num / den;
                ++windows;
            }
        }
    }
    return acc / static_cast<double>(windows);
}

MetricsReport compare(const Ensemble& pred, const Ensemble& truth,
                      double dynamic_range) {
    pred.validate();
    truth.validate();
    if (pred.shape != truth.shape)
        throw ShapeError("compare: ensembles have different state shapes (" +
                         pred.shape.str() + " vs " + truth.shape.str() + ")");

    MetricsReport r;
    r.mean_score_pred = mean_score(pred);
    r.mean_score_true = mean_score(truth);
    r.std_score_pred = std_score(pred);
    r.std_score_true = std_score(truth);

    const auto mean_p = ensemble_mean_state(pred);
    const auto mean_t = ensemble_mean_state(truth);
    const auto sd_p = ensemble_sd_state(pred);
    const auto sd_t = ensemble_sd_state(truth);

    r.mean_state_mse = mse(mean_p, mean_t);
    r.mean_state_mae = mae(mean_p, mean_t);
    r.sd_state_mse = mse(sd_p, sd_t);
    r.sd_state_mae = mae(sd_p, sd_t);
    if (ssim_defined(pred.shape)) {
        r.mean_state_ssim = ssim(mean_p, mean_t, pred.shape, dynamic_range);
        r.sd_state_ssim = ssim(sd_p, sd_t, pred.shape, dynamic_range);
    }
    return r;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string("NA");
}

}  // namespace

std::string report_csv_header() {
    return "mean_score_pred,mean_score_true,std_score_pred,std_score_true,"
           "mean_state_mse,mean_state_mae,mean_state_ssim,"
           "sd_state_mse,sd_state_mae,sd_state_ssim";
}

std::string report_csv_row(const MetricsReport& r) {
    std::ostringstream out;
    out << fmt(r.mean_score_pred) << "," << fmt(r.mean_score_true) << ","
        << fmt(r.std_score_pred) << "," << fmt(r.std_score_true) << ","
        << fmt(r.mean_state_mse) << "," << fmt(r.mean_state_mae) << ","
        << fmt_opt(r.mean_state_ssim) << "," << fmt(r.sd_state_mse) << ","
        << fmt(r.sd_state_mae) << "," << fmt_opt(r.sd_state_ssim);
    return out.str();
}

std::string report_text(const MetricsReport& r) {
    std::ostringstream out;
    out << "scores      pred / true : mean " << fmt(r.mean_score_pred) << " / "
        << fmt(r.mean_score_true) << ", std " << fmt(r.std_score_pred) << " / "
        << fmt(r.std_score_true) << "\n"
        << "mean state  mse " << fmt(r.mean_state_mse) << "  mae "
        << fmt(r.mean_state_mae) << "  ssim " << fmt_opt(r.mean_state_ssim) << "\n"
        << "sd state    mse " << fmt(r.sd_state_mse) << "  mae "
        << fmt(r.sd_state_mae) << "  ssim " << fmt_opt(r.sd_state_ssim) << "\n";
    return out.str();
}

}  // namespace flowcast::metrics
