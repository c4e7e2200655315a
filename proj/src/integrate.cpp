#include "flowcast/integrate.hpp"

#include <chrono>
#include <cmath>

#include "flowcast/errors.hpp"
#include "flowcast/kernels.hpp"
#include "flowcast/nn.hpp"
#include "flowcast/rng.hpp"

namespace flowcast::integrate {

namespace {

void check_state(std::span<const double> q, std::size_t step, bool reverse) {
    for (double v : q) {
        if (!std::isfinite(v) || std::fabs(v) > kDivergenceLimit)
            throw DivergenceError(std::string(reverse ? "reverse" : "forward") +
                                  " Euler diverged at step " + std::to_string(step));
    }
}

}  // namespace

std::vector<double> euler_ode(const VelocityFn& f, std::span<const double> q0,
                              std::size_t n_steps, bool reverse) {
    if (n_steps < 1) throw ConfigError("euler_ode: need at least one step");
    const double dt = 1.0 / static_cast<double>(n_steps);
    std::vector<double> q(q0.begin(), q0.end());
    std::vector<double> v(q.size());
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = reverse ? 1.0 - static_cast<double>(k) * dt
                                 : static_cast<double>(k) * dt;
        f(q, t, v);
        kernels::axpy(reverse ? -dt : dt, v.data(), q.data(), q.size());
        check_state(q, k + 1, reverse);
    }
    return q;
}

namespace {

/// Steps the field's ODE in normalized space; in/out conversion depends on
/// the field kind and direction.
std::vector<double> field_euler(const flow::VelocityField& field,
                                std::span<const double> start,
                                std::size_t n_steps, bool reverse) {
    field.validate();
    if (start.size() != field.state_dim())
        throw ShapeError("euler: state dimension mismatch");

    const bool gaussify = field.kind == flow::FieldKind::gaussify;
    // Gaussify reverse starts from a raw latent point; everything else
    // enters in data space.
    std::vector<double> q(start.begin(), start.end());
    if (!(gaussify && reverse)) field.norm.normalize(q);

    const VelocityFn f = [&field](std::span<const double> qn, double t,
                                  std::span<double> v) {
        const std::vector<double> out = nn::forward(field.params, qn, t);
        std::copy(out.begin(), out.end(), v.begin());
    };
    std::vector<double> end = euler_ode(f, q, n_steps, reverse);

    if (!(gaussify && !reverse)) field.norm.denormalize(end);
    return end;
}

}  // namespace

std::vector<double> euler_forward(const flow::VelocityField& field,
                                  std::span<const double> q0, std::size_t n_steps) {
    return field_euler(field, q0, n_steps, false);
}

std::vector<double> euler_reverse(const flow::VelocityField& field,
                                  std::span<const double> q1, std::size_t n_steps) {
    return field_euler(field, q1, n_steps, true);
}

std::vector<double> euler_maruyama(const std::function<double(double y, double t)>& drift,
                                   double diffusion, double y0, std::size_t n_steps,
                                   std::size_t n_paths, std::uint64_t seed) {
    if (n_steps < 1 || n_paths < 1)
        throw ConfigError("euler_maruyama: need at least one step and one path");
    const double h = 1.0 / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);
    std::vector<double> endpoints(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng = Rng::derive(seed, p);
        double y = y0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double t = static_cast<double>(k) * h;
            y += h * drift(y, t);
            if (diffusion != 0.0) y += diffusion * sqrt_h * rng.normal();
        }
        if (!std::isfinite(y))
            throw DivergenceError("euler_maruyama: non-finite endpoint on path " +
                                  std::to_string(p));
        endpoints[p] = y;
    }
    return endpoints;
}

Ensemble propagate_ensemble(const flow::VelocityField& field, const Ensemble& e0,
                            std::size_t n_steps) {
    e0.validate();
    if (e0.dim() != field.state_dim())
        throw ShapeError("propagate_ensemble: member dims do not match field");
    Ensemble out;
    out.shape = e0.shape;
    out.meta = e0.meta;
    out.meta.source = "forecast";
    out.meta.horizon = field.horizon;
    out.meta.steps = static_cast<int>(n_steps);
    out.members.resize(e0.size());
    for (std::size_t i = 0; i < e0.size(); ++i) {
        try {
            out.members[i] = euler_forward(field, e0.members[i], n_steps);
        } catch (const DivergenceError& e) {
            throw DivergenceError("member " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

CostReport bench_integration(const std::string& scheme, std::size_t n_steps) {
    if (n_steps < 1) throw ConfigError("bench_integration: need at least one step");
    const bool sde = scheme == "sde_euler_maruyama" || scheme == "sde";
    if (!sde && scheme != "ode_euler" && scheme != "ode")
        throw UsageError("unknown scheme '" + scheme + "'");

    CostReport report;
    report.scheme = sde ? "sde_euler_maruyama" : "ode_euler";
    report.steps = n_steps;

    const double h = 1.0 / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);

    // one counted run: per step the ODE costs 1 call and 2 update ops, the
    // SDE adds the noise draw and its scale-and-add
    auto slope = [&report](double, double) {
        report.fn_call_count += 1;
        return 1.0;
    };
    Rng rng(12345);
    double y = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * h;
        y += h * slope(y, t);
        report.op_count += 2;
        if (sde) {
            report.fn_call_count += 1;
            y += 0.2 * (sqrt_h * rng.normal());
            report.op_count += 2;
        }
    }
    if (!std::isfinite(y)) throw DivergenceError("bench_integration diverged");

    // timing: short runs sit below the clock tick, so each measurement
    // times a batch of uncounted repetitions and the best batch wins
    const std::size_t inner = std::max<std::size_t>(1, 4096 / n_steps);
    volatile double vone = 1.0;
    volatile double sink = 0.0;
    Rng trng(12345);  // stream setup stays outside the timed region
    double best = 1e300;
    for (int rep = 0; rep < 9; ++rep) {
        const auto t_start = std::chrono::steady_clock::now();
        double acc = 0.0;
        for (std::size_t run = 0; run < inner; ++run) {
            double yt = 0.0;
            for (std::size_t k = 0; k < n_steps; ++k) {
                yt += h * vone;
                if (sde) yt += 0.2 * (sqrt_h * trng.normal());
            }
            acc += yt;
        }
        const auto t_end = std::chrono::steady_clock::now();
        sink = sink + acc;
        best = std::min(best, std::chrono::duration<double>(t_end - t_start).count() /
                                  static_cast<double>(inner));
    }
    report.wall_time_s = best;
    return report;
}

std::string cost_csv_header() { return "scheme,N,op_count,fn_calls,runtime_s"; }

std::string cost_csv_row(const CostReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%.6e", r.scheme.c_str(),
                  r.steps, r.op_count, r.fn_call_count, r.wall_time_s);
    return buf;
}

}  // namespace flowcast::integrate
