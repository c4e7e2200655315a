// Euler stepping against closed forms: constant-slope exactness, the
// stochastic reference problem's analytic law, and the cost accounting.

#include "flowcast/errors.hpp"
#include "flowcast/flow.hpp"
#include "flowcast/integrate.hpp"
#include "flowcast/rng.hpp"
#include "test_harness.hpp"

#include <cmath>

using namespace flowcast;
using namespace flowcast::test;

namespace {

flow::VelocityField constant_field(const std::vector<double>& c) {
    flow::VelocityField f;
    const std::size_t d = c.size();
    f.params.layer_dims = {d + nn::kTimeEmbedDim, d};
    f.params.activation = nn::Activation::tanh;
    f.params.weights = {std::vector<double>(d * (d + nn::kTimeEmbedDim), 0.0)};
    f.params.biases = {c};
    f.kind = flow::FieldKind::forecast;
    f.norm = NormStats::identity(d);
    f.horizon = 1.0;
    return f;
}

void test_euler_ode() {
    section("euler_ode on dy/dt = 1");
    const integrate::VelocityFn one = [](std::span<const double>, double,
                                         std::span<double> v) { v[0] = 1.0; };
    for (std::size_t n : {1u, 10u, 100u, 1000u}) {
        const auto y = integrate::euler_ode(one, std::vector<double>{0.0}, n);
        check(std::fabs(y[0] - 1.0) < 1e-12,
              "N=" + std::to_string(n) + " lands on 1 (err " + num(y[0] - 1.0) + ")");
    }
}

void test_constant_field() {
    section("constant velocity field");
    const auto f = constant_field({1.5, -0.5});
    const std::vector<double> q0{0.25, 0.75};
    const auto a = integrate::euler_forward(f, q0, 1);
    const auto b = integrate::euler_forward(f, q0, 1000);
    check_close(a[0], 1.75, 1e-15, "N=1 forward x");
    check_close(a[1], 0.25, 1e-15, "N=1 forward y");
    check(std::fabs(a[0] - b[0]) < 1e-12 && std::fabs(a[1] - b[1]) < 1e-12,
          "result independent of N to machine precision");

    const auto r = integrate::euler_reverse(f, a, 1);
    check(r == q0, "reverse undoes forward exactly on dyadic data");

    // reverse of an arbitrary point subtracts c
    const auto r2 = integrate::euler_reverse(f, std::vector<double>{0.0, 0.0}, 64);
    check_close(r2[0], -1.5, 1e-13, "reverse subtracts c (x)");
    check_close(r2[1], 0.5, 1e-13, "reverse subtracts c (y)");

    // generic round trip stays at rounding error
    const auto fwd = integrate::euler_forward(f, std::vector<double>{0.1, 0.2}, 7);
    const auto back = integrate::euler_reverse(f, fwd, 7);
    check(std::fabs(back[0] - 0.1) < 1e-13 && std::fabs(back[1] - 0.2) < 1e-13,
          "generic round trip at rounding error");
}

void test_euler_maruyama() {
    section("euler_maruyama");
    const auto drift_one = [](double, double) { return 1.0; };
    auto ends = integrate::euler_maruyama(drift_one, 0.0, 0.0, 100, 32, 5);
    bool exact = true;
    for (double e : ends) exact = exact && std::fabs(e - 1.0) < 1e-12;
    check(exact, "zero diffusion reduces to Euler: every endpoint is 1");

    ends = integrate::euler_maruyama(drift_one, 0.2, 0.0, 100, 10000, 42);
    double mean = 0.0;
    for (double e : ends) mean += e;
    mean /= static_cast<double>(ends.size());
    double var = 0.0;
    for (double e : ends) var += (e - mean) * (e - mean);
    const double sd = std::sqrt(var / static_cast<double>(ends.size()));
    check(std::fabs(mean - 1.0) < 0.01, "endpoint mean in 1 +- 0.01 (" + num(mean) + ")");
    check(std::fabs(sd - 0.2) < 0.01, "endpoint std in 0.2 +- 0.01 (" + num(sd) + ")");

    const auto again = integrate::euler_maruyama(drift_one, 0.2, 0.0, 100, 10000, 42);
    check(ends == again, "same seed gives identical endpoints");
}

void test_propagate() {
    section("propagate_ensemble");
    const auto f = constant_field({1.0, 2.0});
    Ensemble e;
    e.shape = Shape::vec(2);
    e.members = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}};
    const auto out = integrate::propagate_ensemble(f, e, 10);
    check(out.members[0] == integrate::euler_forward(f, e.members[0], 10),
          "M=1 slot matches euler_forward");
    check(out.meta.steps == 10 && out.meta.horizon == 1.0,
          "meta carries steps and horizon");

    Ensemble perm;
    perm.shape = e.shape;
    perm.members = {e.members[2], e.members[0], e.members[1]};
    const auto pout = integrate::propagate_ensemble(f, perm, 10);
    check(pout.members[0] == out.members[2] && pout.members[1] == out.members[0] &&
              pout.members[2] == out.members[1],
          "permuting inputs permutes outputs identically");

    // a diverging member is named
    const auto boom = constant_field({1e9, 1e9});
    try {
        integrate::propagate_ensemble(boom, e, 1);
        check(false, "divergence not raised");
    } catch (const DivergenceError& err) {
        check(std::string(err.what()).find("member 0") != std::string::npos,
              "divergence names the member index");
    }
}

void test_bench() {
    section("bench_integration");
    for (std::size_t n : {1u, 10u, 100u, 1000u}) {
        const auto r = integrate::bench_integration("ode_euler", n);
        check(r.fn_call_count == n && r.op_count == 2 * n,
              "ODE N=" + std::to_string(n) + " counts (fn=" +
                  std::to_string(r.fn_call_count) + ", ops=" +
                  std::to_string(r.op_count) + ")");
    }
    for (std::size_t n : {10u, 100u, 1000u}) {
        const auto r = integrate::bench_integration("sde_euler_maruyama", n);
        check(r.fn_call_count == 2 * n && r.op_count == 4 * n,
              "SDE N=" + std::to_string(n) + " counts");
    }
    check(integrate::cost_csv_header() == "scheme,N,op_count,fn_calls,runtime_s",
          "CSV header matches the cost table columns");
    const auto row = integrate::cost_csv_row(integrate::bench_integration("ode", 10));
    check(row.rfind("ode_euler,10,20,10,", 0) == 0, "CSV row prefix (" + row + ")");
    check_throws<UsageError>([] { integrate::bench_integration("rk4", 10); },
                             "unknown scheme rejected");
}

}  // namespace

int main() {
    test_euler_ode();
    test_constant_field();
    test_euler_maruyama();
    test_propagate();
    test_bench();
    return summary("integrate");
}
