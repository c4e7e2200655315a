// Flow-matching training oracles: the exact-solution constant-shift
// dataset, the analytic single-point gaussify velocity, and the loss
// definition shared with the network module.

#include "flowcast/errors.hpp"
#include "flowcast/flow.hpp"
#include "flowcast/rng.hpp"
#include "test_harness.hpp"

#include <cmath>

using namespace flowcast;
using namespace flowcast::test;

namespace {

void test_interpolate() {
    section("interpolate");
    const std::vector<double> q0{0.5, -1.25, 3.0};
    const std::vector<double> q1{-2.0, 4.5, 0.125};
    check(flow::interpolate(q0, q1, 0.0) == q0, "t=0 returns q0 bit-exactly");
    check(flow::interpolate(q0, q1, 1.0) == q1, "t=1 returns q1 bit-exactly");

    const auto mid = flow::interpolate(std::vector<double>{0.0, 0.0},
                                       std::vector<double>{2.0, 4.0}, 0.5);
    check(mid == std::vector<double>({1.0, 2.0}), "midpoint of (0,0)-(2,4)");

    for (double t : {0.0, 0.5, 1.0})
        check(flow::interpolate(q0, q0, t) == q0,
              "degenerate pair is constant at dyadic t=" + num(t));
    for (double t : {0.3, 0.7}) {
        const auto qt = flow::interpolate(q0, q0, t);
        double err = 0.0;
        for (std::size_t i = 0; i < q0.size(); ++i)
            err = std::max(err, std::fabs(qt[i] - q0[i]));
        check(err <= 4e-16 * 3.0, "degenerate pair within 1 ulp at t=" + num(t));
    }

    check_throws<ShapeError>(
        [&] { flow::interpolate(q0, std::vector<double>{1.0}, 0.5); },
                             "dimension mismatch");
}

dynamics::Dataset constant_shift_dataset(std::size_t n, std::uint64_t seed) {
    dynamics::Dataset ds;
    ds.shape = Shape::vec(2);
    ds.horizon = 1.0;
    ds.meta = {"toy-shift", seed};
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> q0{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        ds.pairs.push_back({q0, {q0[0] + 1.5, q0[1] - 0.75}});
    }
    ds.refresh_norm();
    return ds;
}

void test_constant_shift_training() {
    section("train_forecast_flow on the constant-shift dataset");
    const auto ds = constant_shift_dataset(512, 5);
    flow::TrainConfig cfg;
    cfg.epochs = 200;
    cfg.hidden = {32, 32};
    cfg.seed = 1;
    cfg.lr = 3e-3;  // small toy run; the default rate needs far more steps
    const auto r1 = flow::train_forecast_flow(ds, cfg);
    const auto r2 = flow::train_forecast_flow(ds, cfg);
    check(r1.epoch_loss.back() == r2.epoch_loss.back(),
          "identical seeds give identical final loss");
    check(r1.epoch_loss.back() < 1e-3,
          "final loss < 1e-3 (" + num(r1.epoch_loss.back()) + ")");
    check(r1.epoch_loss.front() > r1.epoch_loss.back(), "loss decreases");

    // velocity approximates the shift c = (1.5, -0.75) on held-out q_t
    // points drawn from the data support
    Rng rng(99);
    double mad = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> q0{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double t = rng.uniform();
        const auto qt = flow::interpolate(
            q0, std::vector<double>{q0[0] + 1.5, q0[1] - 0.75}, t);
        const auto v = flow::velocity(r1.field, qt, t);
        mad += (std::fabs(v[0] - 1.5) + std::fabs(v[1] + 0.75)) / 2.0;
    }
    mad /= 200.0;
    check(mad < 1e-2, "mean absolute deviation from c < 1e-2 (" + num(mad) + ")");

    check_throws<UsageError>(
        [&] {
            flow::train_forecast_flow(
                dynamics::Dataset{Shape::vec(2), 1.0, {}, {}, {}}, cfg);
        },
        "empty dataset rejected");
}

void test_single_point_gaussify() {
    section("train_gaussify_flow on a single-point marginal");
    // All states equal y*; normalized data is the zero vector and the
    // optimal velocity on the interpolant support is v(q, t) = q / t.
    const std::vector<double> y_star{0.7, -0.2};
    std::vector<std::vector<double>> states(1024, y_star);
    flow::TrainConfig cfg;
    cfg.epochs = 120;
    cfg.hidden = {32, 32};
    cfg.seed = 3;
    cfg.lr = 3e-3;
    const auto res = flow::train_gaussify_flow(states, Shape::vec(2), cfg);
    check(res.field.kind == flow::FieldKind::gaussify, "field kind is gaussify");
    check(res.field.norm.constant[0] == 1 && res.field.norm.constant[1] == 1,
          "constant dimensions flagged");

    // Monte Carlo check of the analytic velocity away from the t=0
    // singularity, in normalized coordinates.
    Rng rng(17);
    double rel = 0.0;
    int count = 0;
    for (int i = 0; i < 300; ++i) {
        const double t = rng.uniform(0.25, 0.95);
        const std::vector<double> z{rng.normal(), rng.normal()};
        const std::vector<double> qt{t * z[0], t * z[1]};
        const auto v = nn::forward(res.field.params, qt, t);
        for (int d = 0; d < 2; ++d) {
            const double want = qt[d] / t;
            if (std::fabs(want) > 0.3) {
                rel += std::fabs(v[d] - want) / std::fabs(want);
                ++count;
            }
        }
    }
    rel /= count;
    check(rel < 0.15, "learned velocity tracks q/t on the support (mean rel " +
                          num(rel) + ")");
}

void test_fm_loss() {
    section("fm_loss");
    flow::VelocityField zero;
    zero.params.layer_dims = {2 + nn::kTimeEmbedDim, 2};
    zero.params.activation = nn::Activation::tanh;
    zero.params.weights = {std::vector<double>(2 * 5, 0.0)};
    zero.params.biases = {std::vector<double>(2, 0.0)};
    zero.kind = flow::FieldKind::forecast;
    zero.norm = NormStats::identity(2);

    nn::Batch b;
    b.state_dim = 2;
    b.push(std::vector<double>{0.1, 0.2}, 0.3, std::vector<double>{0.0, 0.0});
    check(flow::fm_loss(zero, b) == 0.0, "zero field on zero targets");

    nn::Batch b1, b2;
    b1.state_dim = b2.state_dim = 2;
    b1.push(std::vector<double>{0.1, 0.2}, 0.3, std::vector<double>{0.5, -1.0});
    b2.push(std::vector<double>{0.1, 0.2}, 0.3, std::vector<double>{1.0, -2.0});
    check(flow::fm_loss(zero, b2) == 4.0 * flow::fm_loss(zero, b1),
          "doubling targets scales the quadratic loss by 4");

    const auto p = nn::init_params({2 + nn::kTimeEmbedDim, 4, 2}, nn::Activation::tanh, 8);
    flow::VelocityField f{p, flow::FieldKind::forecast, NormStats::identity(2), 1.0};
    auto grads = nn::make_gradients(p);
    check(flow::fm_loss(f, b1) == nn::loss_and_grad(p, b1, grads),
          "fm_loss matches loss_and_grad exactly");
}

}  // namespace

int main() {
    test_interpolate();
    test_constant_shift_training();
    test_single_point_gaussify();
    test_fm_loss();
    return summary("flow");
}
