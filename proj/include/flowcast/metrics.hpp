#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowcast/ensemble.hpp"
#include "flowcast/shape.hpp"

namespace flowcast::metrics {

/// One comparison row between a predicted and a reference ensemble.
/// SSIM fields stay empty for states where windowed SSIM is undefined
/// (non-grid states or grids smaller than one window).
struct MetricsReport {
    double mean_score_pred = 0.0;
    double mean_score_true = 0.0;
    double std_score_pred = 0.0;
    double std_score_true = 0.0;
    double mean_state_mse = 0.0;
    double mean_state_mae = 0.0;
    std::optional<double> mean_state_ssim;
    double sd_state_mse = 0.0;
    double sd_state_mae = 0.0;
    std::optional<double> sd_state_ssim;
};

/// Elementwise mean over members.
std::vector<double> ensemble_mean_state(const Ensemble& e);

/// Elementwise population standard deviation over members.
std::vector<double> ensemble_sd_state(const Ensemble& e);

/// Pooled scalar mean over all members and entries.
double mean_score(const Ensemble& e);

/// Pooled population standard deviation about mean_score.
double std_score(const Ensemble& e);

double mse(std::span<const double> a, std::span<const double> b);
double mae(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kSsimWindow = 8;

/// Windowed SSIM: 8x8 windows at stride 8 (uniform window), K1 = 0.01,
/// K2 = 0.03, averaged over windows and channels. `dynamic_range` is the
/// declared data range L. Throws if the grid is smaller than one window.
double ssim(std::span<const double> a, std::span<const double> b,
            const Shape& shape, double dynamic_range = 1.0);

bool ssim_defined(const Shape& shape);

MetricsReport compare(const Ensemble& pred, const Ensemble& truth,
                      double dynamic_range = 1.0);

std::string report_csv_header();
std::string report_csv_row(const MetricsReport& r);
std::string report_text(const MetricsReport& r);

}  // namespace flowcast::metrics
