#include "flowcast/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowcast/errors.hpp"
#include "flowcast/rng.hpp"

namespace flowcast::dynamics {

void LVParams::validate() const {
    if (!(p1 > 0.0 && p2 > 0.0 && p3 > 0.0 && p4 > 0.0) ||
        !std::isfinite(p1 + p2 + p3 + p4))
        throw ConfigError("LV rates must be strictly positive and finite");
}

std::array<double, 2> lv_rhs(const std::array<double, 2>& y, const LVParams& p) {
    return {p.p1 * y[0] - p.p2 * y[0] * y[1],
            p.p3 * y[0] * y[1] - p.p4 * y[1]};
}

double lv_first_integral(const std::array<double, 2>& y, const LVParams& p) {
    return p.p3 * y[0] - p.p4 * std::log(y[0]) + p.p2 * y[1] - p.p1 * std::log(y[1]);
}

namespace {

bool finite(std::span<const double> y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

/// One RK4 step of size h in place; k-stage scratch passed in.
template <typename RhsT>
void rk4_step(const RhsT& rhs, double t, double h, std::vector<double>& y,
              std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& tmp) {
    const std::size_t n = y.size();
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

template <typename RhsT, typename Record>
void rk4_run(const RhsT& rhs, std::span<const double> y0, double t0, double t1,
             double dt, Record&& record) {
    if (!(dt > 0.0)) throw ConfigError("rk4: dt must be positive");
    if (!(t1 > t0)) throw ConfigError("rk4: t1 must exceed t0");

    const std::size_t n = y0.size();
    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    const double span = t1 - t0;
    const auto full_steps = static_cast<std::size_t>(std::floor(span / dt * (1.0 + 1e-12)));
    double t = t0;
    record(0, t, y, false);
    for (std::size_t s = 0; s < full_steps; ++s) {
        rk4_step(rhs, t, dt, y, k1, k2, k3, k4, tmp);
        t = t0 + static_cast<double>(s + 1) * dt;
        if (!finite(y))
            throw DivergenceError("rk4: non-finite state at t = " + std::to_string(t));
        const bool last = (s + 1 == full_steps) && (t >= t1 - 1e-12 * span);
        record(s + 1, last ? t1 : t, y, last);
    }
    if (t < t1 - 1e-12 * span) {
        rk4_step(rhs, t, t1 - t, y, k1, k2, k3, k4, tmp);
        if (!finite(y))
            throw DivergenceError("rk4: non-finite state at t = " + std::to_string(t1));
        record(full_steps + 1, t1, y, true);
    }
}

}  // namespace

std::vector<TrajectoryPoint> rk4_integrate(const Rhs& rhs,
                                           std::span<const double> y0,
                                           double t0, double t1, double dt,
                                           std::size_t record_stride) {
    if (record_stride == 0) record_stride = 1;
    std::vector<TrajectoryPoint> out;
    rk4_run(rhs, y0, t0, t1, dt,
            [&](std::size_t step, double t, const std::vector<double>& y, bool last) {
                if (step % record_stride == 0 || last || step == 0)
                    out.push_back({t, y});
            });
    return out;
}

std::vector<double> rk4_endpoint(const Rhs& rhs, std::span<const double> y0,
                                 double t0, double t1, double dt) {
    std::vector<double> end(y0.begin(), y0.end());
    rk4_run(rhs, y0, t0, t1, dt,
            [&](std::size_t, double, const std::vector<double>& y, bool last) {
                if (last) end = y;
            });
    return end;
}

void ObservationModel::validate(std::size_t state_dim) const {
    if (selector.empty() || selector.size() > state_dim)
        throw ShapeError("observation selector must have 1..state_dim rows");
    for (const auto& row : selector)
        if (row.size() != state_dim)
            throw ShapeError("observation selector row has wrong length");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw ConfigError("observation noise sigma must be finite and >= 0");
}

ObservationModel ObservationModel::identity(std::size_t d, double sigma) {
    ObservationModel m;
    m.selector.assign(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) m.selector[i][i] = 1.0;
    m.noise_sigma = sigma;
    return m;
}

std::vector<double> observe(std::span<const double> y,
                            const ObservationModel& model, std::uint64_t seed) {
    model.validate(y.size());
    Rng rng(seed);
    std::vector<double> q(model.selector.size());
    for (std::size_t r = 0; r < q.size(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < y.size(); ++c) acc += model.selector[r][c] * y[c];
        q[r] = acc + (model.noise_sigma > 0.0 ? model.noise_sigma * rng.normal() : 0.0);
    }
    return q;
}

InitSampler InitSampler::gaussian(std::vector<double> mean, double stddev) {
    InitSampler s;
    s.kind = Kind::gaussian;
    s.mean = std::move(mean);
    s.stddev = stddev;
    return s;
}

InitSampler InitSampler::fixed_y1_uniform_y2(double lo, double hi) {
    InitSampler s;
    s.kind = Kind::fixed_y1_uniform_y2;
    s.lo = lo;
    s.hi = hi;
    return s;
}

std::vector<std::vector<double>> Dataset::marginal(bool target_side) const {
    std::vector<std::vector<double>> out;
    out.reserve(pairs.size());
    for (const auto& pr : pairs) out.push_back(target_side ? pr.qT : pr.q0);
    return out;
}

void Dataset::refresh_norm() {
    const std::size_t d = dim();
    if (pairs.empty()) {
        norm = NormStats::identity(d);
        return;
    }
    std::vector<double> flat;
    flat.reserve(pairs.size() * 2 * d);
    for (const auto& pr : pairs) {
        flat.insert(flat.end(), pr.q0.begin(), pr.q0.end());
        flat.insert(flat.end(), pr.qT.begin(), pr.qT.end());
    }
    norm = NormStats::fit(flat, d);
}

namespace {

/// Draws one positive LV initial state from the sampler's substream, or
/// throws after 1000 rejected attempts.
std::vector<double> draw_positive_init(const InitSampler& init, Rng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> y;
        if (init.kind == InitSampler::Kind::gaussian) {
            y.resize(init.mean.size());
            for (std::size_t d = 0; d < y.size(); ++d)
                y[d] = init.mean[d] + init.stddev * rng.normal();
        } else {
            y = {1.0, rng.uniform(init.lo, init.hi)};
        }
        if (std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; }))
            return y;
    }
    throw Error("init sampler produced no positive state after 1000 redraws");
}

/// Inlined LV right-hand side for the dataset generators; identical
/// arithmetic to lv_rhs without the std::function hop.
struct LvRhs {
    LVParams p;
    void operator()(double, std::span<const double> y, std::span<double> dydt) const {
        dydt[0] = p.p1 * y[0] - p.p2 * y[0] * y[1];
        dydt[1] = p.p3 * y[0] * y[1] - p.p4 * y[1];
    }
};

std::vector<double> lv_endpoint(const LvRhs& rhs, std::span<const double> y0,
                                double t1, double dt) {
    std::vector<double> end(y0.begin(), y0.end());
    rk4_run(rhs, y0, 0.0, t1, dt,
            [&](std::size_t, double, const std::vector<double>& y, bool last) {
                if (last) end = y;
            });
    return end;
}

}  // namespace

Dataset gen_pp_dataset(std::size_t n, double horizon, const InitSampler& init,
                       const LVParams& p, std::uint64_t seed, double dt) {
    p.validate();
    Dataset ds;
    ds.shape = Shape::vec(2);
    ds.horizon = horizon;
    ds.meta = {init.kind == InitSampler::Kind::gaussian ? "pp-gaussian"
                                                        : "pp-uniform-y2",
               seed};
    ds.pairs.reserve(n);
    const LvRhs rhs{p};
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::derive(seed, i);
        std::vector<double> y0 = draw_positive_init(init, rng);
        ds.pairs.push_back({y0, lv_endpoint(rhs, y0, horizon, dt)});
    }
    ds.refresh_norm();
    return ds;
}

Dataset gen_pp_transitions(std::size_t n_traj, double total_time, double step,
                           const InitSampler& init, const LVParams& p,
                           std::uint64_t seed, double dt) {
    p.validate();
    if (!(step > 0.0) || !(total_time >= step))
        throw ConfigError("gen_pp_transitions: need 0 < step <= total_time");
    Dataset ds;
    ds.shape = Shape::vec(2);
    ds.horizon = step;
    ds.meta = {"pp-transitions", seed};
    const LvRhs rhs{p};
    const auto n_steps = static_cast<std::size_t>(std::floor(total_time / step + 1e-9));
    for (std::size_t i = 0; i < n_traj; ++i) {
        Rng rng = Rng::derive(seed, i);
        std::vector<double> y = draw_positive_init(init, rng);
        for (std::size_t s = 0; s < n_steps; ++s) {
            std::vector<double> next = lv_endpoint(rhs, y, step, dt);
            ds.pairs.push_back({y, next});
            y = std::move(next);
        }
    }
    ds.refresh_norm();
    return ds;
}

namespace {

/// Periodic Gaussian bump centered at (cx, cy), peak value 1.
void render_blob(double cx, double cy, double sigma, std::uint32_t h,
                 std::uint32_t w, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(h) * w);
    for (std::uint32_t y = 0; y < h; ++y) {
        double dy = std::fabs(static_cast<double>(y) - cy);
        dy = std::min(dy, static_cast<double>(h) - dy);
        for (std::uint32_t x = 0; x < w; ++x) {
            double dx = std::fabs(static_cast<double>(x) - cx);
            dx = std::min(dx, static_cast<double>(w) - dx);
            out[static_cast<std::size_t>(y) * w + x] =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        }
    }
}

}  // namespace

// Each source pixel splits its intensity over four targets with weights
// summing to 1, so the total is conserved exactly up to rounding.
std::vector<double> warp_periodic(std::span<const double> src, double sx,
                                  double sy, std::uint32_t h, std::uint32_t w) {
    if (src.size() != static_cast<std::size_t>(h) * w)
        throw ShapeError("warp_periodic: image size mismatch");
    std::vector<double> dst(src.size(), 0.0);
    const double fx = std::floor(sx), fy = std::floor(sy);
    const double ax = sx - fx, ay = sy - fy;
    const auto ix = static_cast<long>(fx), iy = static_cast<long>(fy);
    auto wrap = [](long v, long m) { return ((v % m) + m) % m; };
    for (std::uint32_t y = 0; y < h; ++y) {
        const long y0 = wrap(static_cast<long>(y) + iy, h);
        const long y1 = wrap(y0 + 1, h);
        for (std::uint32_t x = 0; x < w; ++x) {
            const long x0 = wrap(static_cast<long>(x) + ix, w);
            const long x1 = wrap(x0 + 1, w);
            const double v = src[static_cast<std::size_t>(y) * w + x];
            dst[static_cast<std::size_t>(y0) * w + x0] += v * (1.0 - ax) * (1.0 - ay);
            dst[static_cast<std::size_t>(y0) * w + x1] += v * ax * (1.0 - ay);
            dst[static_cast<std::size_t>(y1) * w + x0] += v * (1.0 - ax) * ay;
            dst[static_cast<std::size_t>(y1) * w + x1] += v * ax * ay;
        }
    }
    return dst;
}

Dataset gen_blob_dataset(std::size_t n, std::uint32_t h, std::uint32_t w,
                         double velocity_jitter, std::uint64_t seed) {
    if (h < 8 || w < 8) throw ConfigError("gen_blob_dataset: grid must be at least 8x8");
    const double blob_sigma = 1.3;

    Dataset ds;
    ds.shape = Shape::grid(h, w);
    ds.horizon = 1.0;
    ds.meta = {"blob", seed};
    ds.pairs.reserve(n);
    std::vector<double> frame;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::derive(seed, i);
        const double cx = rng.uniform(0.0, static_cast<double>(w));
        const double cy = rng.uniform(0.0, static_cast<double>(h));
        const double amp = rng.uniform(0.5, 0.65);
        const double bg = rng.uniform(0.1, 0.35);
        const double vx = kBlobBaseVx + velocity_jitter * rng.normal();
        const double vy = kBlobBaseVy + velocity_jitter * rng.normal();
        render_blob(cx, cy, blob_sigma, h, w, frame);
        StatePair pr;
        pr.q0.resize(frame.size());
        for (std::uint32_t y = 0; y < h; ++y)
            for (std::uint32_t x = 0; x < w; ++x) {
                // two texture periods across the width keep the background
                // mode structural inside an 8x8 metric window
                const double tex =
                    0.5 + 0.5 * std::sin(4.0 * std::numbers::pi *
                                         static_cast<double>(x) / static_cast<double>(w));
                pr.q0[static_cast<std::size_t>(y) * w + x] =
                    bg * tex + amp * frame[static_cast<std::size_t>(y) * w + x];
            }
        pr.qT = warp_periodic(pr.q0, vx * ds.horizon, vy * ds.horizon, h, w);
        ds.pairs.push_back(std::move(pr));
    }
    ds.refresh_norm();
    return ds;
}

namespace {

double pooled_accumulate(const Dataset& ds, bool target_side, bool second_pass,
                         double mean) {
    double acc = 0.0;
    for (const auto& pr : ds.pairs) {
        const auto& v = target_side ? pr.qT : pr.q0;
        for (double x : v) acc += second_pass ? (x - mean) * (x - mean) : x;
    }
    return acc;
}

}  // namespace

double pooled_mean(const Dataset& ds, bool target_side) {
    if (ds.pairs.empty()) throw UsageError("pooled_mean: empty dataset");
    const double count = static_cast<double>(ds.count()) * static_cast<double>(ds.dim());
    return pooled_accumulate(ds, target_side, false, 0.0) / count;
}

double pooled_std(const Dataset& ds, bool target_side) {
    if (ds.pairs.empty()) throw UsageError("pooled_std: empty dataset");
    const double count = static_cast<double>(ds.count()) * static_cast<double>(ds.dim());
    const double mean = pooled_mean(ds, target_side);
    return std::sqrt(pooled_accumulate(ds, target_side, true, mean) / count);
}

}  // namespace flowcast::dynamics
