#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flowcast/ensemble.hpp"
#include "flowcast/flow.hpp"

namespace flowcast::integrate {

/// Euler stepping diverges when any state component passes this magnitude.
inline constexpr double kDivergenceLimit = 1e8;

/// Default step count for trained fields.
inline constexpr std::size_t kDefaultSteps = 100;

/// Velocity callback for the raw stepper: v = f(q, t).
using VelocityFn =
    std::function<void(std::span<const double> q, double t, std::span<double> v)>;

/// N explicit Euler steps of dq/dt = f(q, t) over flow time [0, 1].
/// Reverse mode runs t from 1 to 0 with negated velocity.
std::vector<double> euler_ode(const VelocityFn& f, std::span<const double> q0,
                              std::size_t n_steps, bool reverse = false);

/// Forward Euler under a trained field, flow time 0 -> 1. Forecast fields
/// map data space to data space (normalize in, denormalize out); gaussify
/// fields end in the latent space, so the raw normalized endpoint is
/// returned.
std::vector<double> euler_forward(const flow::VelocityField& field,
                                  std::span<const double> q0, std::size_t n_steps);

/// Reverse Euler, flow time 1 -> 0; the mirror of euler_forward (gaussify
/// fields start from a raw latent point and end denormalized).
std::vector<double> euler_reverse(const flow::VelocityField& field,
                                  std::span<const double> q1, std::size_t n_steps);

/// Euler-Maruyama endpoints for dy = drift(y, t) dt + diffusion dW over
/// [0, 1]: y += h drift + diffusion * sqrt(h) * xi. One substream per path.
std::vector<double> euler_maruyama(const std::function<double(double y, double t)>& drift,
                                   double diffusion, double y0, std::size_t n_steps,
                                   std::size_t n_paths, std::uint64_t seed);

/// Memberwise euler_forward over an ensemble; a diverging member fails with
/// its index in the message.
Ensemble propagate_ensemble(const flow::VelocityField& field, const Ensemble& e0,
                            std::size_t n_steps);

struct CostReport {
    std::string scheme;  // "ode_euler" | "sde_euler_maruyama"
    std::size_t steps = 0;
    std::size_t op_count = 0;
    std::size_t fn_call_count = 0;
    double wall_time_s = 0.0;
};

/// Integrates the reference problem dy = dt (+ 0.2 dW) over [0, 1] with N
/// steps, counting function evaluations and arithmetic update operations:
/// ODE does 1 call and 2 ops per step, SDE 2 calls and 4 ops per step.
CostReport bench_integration(const std::string& scheme, std::size_t n_steps);

/// CSV lines matching the cost table columns: scheme,N,op_count,fn_calls,runtime_s.
std::string cost_csv_header();
std::string cost_csv_row(const CostReport& report);

}  // namespace flowcast::integrate
