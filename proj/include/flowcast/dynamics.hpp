#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flowcast/normalize.hpp"
#include "flowcast/shape.hpp"

namespace flowcast::dynamics {

/// Lotka-Volterra rates: growth, predation, conversion, death.
struct LVParams {
    double p1 = 2.0 / 3.0;
    double p2 = 4.0 / 3.0;
    double p3 = 1.0;
    double p4 = 1.0;

    void validate() const;  // all strictly positive
};

/// dy1/dt = p1 y1 - p2 y1 y2,  dy2/dt = p3 y1 y2 - p4 y2.
std::array<double, 2> lv_rhs(const std::array<double, 2>& y, const LVParams& p);

/// Conserved quantity V(y) = p3 y1 - p4 ln y1 + p2 y2 - p1 ln y2.
double lv_first_integral(const std::array<double, 2>& y, const LVParams& p);

using Rhs = std::function<void(double t, std::span<const double> y,
                               std::span<double> dydt)>;

struct TrajectoryPoint {
    double t;
    std::vector<double> y;
};

/// Classic RK4 with fixed step dt; the last step is shortened so the final
/// entry lands exactly at t1. `record_stride` keeps every k-th step (the
/// initial point and the endpoint are always recorded). Throws
/// DivergenceError naming the time if the state goes non-finite.
std::vector<TrajectoryPoint> rk4_integrate(const Rhs& rhs,
                                           std::span<const double> y0,
                                           double t0, double t1, double dt,
                                           std::size_t record_stride = 1);

/// Endpoint-only RK4, same stepping as rk4_integrate.
std::vector<double> rk4_endpoint(const Rhs& rhs, std::span<const double> y0,
                                 double t0, double t1, double dt);

/// Observation operator q = S y + eps, eps ~ N(0, sigma^2 I).
struct ObservationModel {
    std::vector<std::vector<double>> selector;  // rows x state_dim
    double noise_sigma = 0.0;

    void validate(std::size_t state_dim) const;
    static ObservationModel identity(std::size_t d, double sigma = 0.0);
};

std::vector<double> observe(std::span<const double> y,
                            const ObservationModel& model, std::uint64_t seed);

/// Initial-state sampler for the predator-prey generators.
struct InitSampler {
    enum class Kind { gaussian, fixed_y1_uniform_y2 };
    Kind kind = Kind::gaussian;
    std::vector<double> mean{0.1, 0.3};
    double stddev = 0.05;
    double lo = 0.0;
    double hi = 1.0;

    static InitSampler gaussian(std::vector<double> mean, double stddev);
    static InitSampler fixed_y1_uniform_y2(double lo, double hi);
};

struct StatePair {
    std::vector<double> q0;
    std::vector<double> qT;
};

struct DatasetMeta {
    std::string generator;
    std::uint64_t seed = 0;
};

/// Paired (q0, qT) samples plus the statistics needed to normalize them.
struct Dataset {
    Shape shape;
    double horizon = 0.0;
    std::vector<StatePair> pairs;
    NormStats norm;  // per-dimension, pooled over both pair sides
    DatasetMeta meta;

    std::size_t count() const { return pairs.size(); }
    std::size_t dim() const { return shape.size(); }

    /// One side of the pairs as a flat state collection.
    std::vector<std::vector<double>> marginal(bool target_side) const;

    /// Recomputes `norm` from the stored pairs (identity when empty).
    void refresh_norm();
};

/// Draws n initial states (redrawing any with a non-positive component),
/// integrates each to `horizon` with the RK4 oracle at `dt`, and stores the
/// (y0, y_horizon) pairs. Deterministic given seed; per-sample substreams.
Dataset gen_pp_dataset(std::size_t n, double horizon, const InitSampler& init,
                       const LVParams& p, std::uint64_t seed,
                       double dt = 1e-3);

/// Short-step transitions (y(t), y(t+step)) harvested along `n_traj`
/// trajectories over [0, total_time]; the single-lag baseline trains on
/// these. Stored horizon equals `step`.
Dataset gen_pp_transitions(std::size_t n_traj, double total_time, double step,
                           const InitSampler& init, const LVParams& p,
                           std::uint64_t seed, double dt = 1e-3);

/// Synthetic image pairs: a periodic Gaussian intensity blob with random
/// amplitude over a sinusoidal background of random strength, advected by a
/// jittered velocity. Pixel values lie in [0, 1]; the advection is a
/// periodic bilinear warp, so total intensity is conserved.
Dataset gen_blob_dataset(std::size_t n, std::uint32_t h, std::uint32_t w,
                         double velocity_jitter, std::uint64_t seed);

/// Shared deterministic advection velocity of the blob generator, in pixels
/// per unit horizon.
inline constexpr double kBlobBaseVx = 1.7;
inline constexpr double kBlobBaseVy = 0.9;

/// Periodic bilinear warp by (sx, sy) pixels; the advection operator behind
/// gen_blob_dataset. Linear in the image and exactly mass-conserving.
std::vector<double> warp_periodic(std::span<const double> src, double sx,
                                  double sy, std::uint32_t h, std::uint32_t w);

/// Pooled scalar mean over every state entry of one pair side.
double pooled_mean(const Dataset& ds, bool target_side);
/// Pooled population standard deviation over one pair side.
double pooled_std(const Dataset& ds, bool target_side);

}  // namespace flowcast::dynamics
