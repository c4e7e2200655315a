// Least-squares identities for the VAR baseline: exact recovery of affine
// data, interpolation at minimal sample count, and the normal equations'
// orthogonality property.

#include "flowcast/baseline.hpp"
#include "flowcast/errors.hpp"
#include "flowcast/io.hpp"
#include "flowcast/rng.hpp"
#include "test_harness.hpp"

#include <cmath>
#include <filesystem>

using namespace flowcast;
using namespace flowcast::test;

namespace {

dynamics::Dataset make_pairs(const std::vector<std::vector<double>>& q0s,
                             const std::vector<std::vector<double>>& qTs) {
    dynamics::Dataset ds;
    ds.shape = Shape::vec(q0s[0].size());
    ds.horizon = 1.0;
    for (std::size_t i = 0; i < q0s.size(); ++i) ds.pairs.push_back({q0s[i], qTs[i]});
    ds.refresh_norm();
    return ds;
}

void test_exact_affine() {
    section("var_fit on exact affine data");
    Rng rng(2);
    std::vector<std::vector<double>> q0s, qTs;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> q{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        q0s.push_back(q);
        qTs.push_back({2.0 * q[0] + 1.0, 2.0 * q[1] + 1.0});
    }
    const auto m = baseline::var_fit(make_pairs(q0s, qTs));
    check_close(m.a[0], 2.0, 1e-8, "A[0][0] = 2");
    check_close(m.a[3], 2.0, 1e-8, "A[1][1] = 2");
    check_close(m.a[1], 0.0, 1e-8, "A[0][1] = 0");
    check_close(m.b[0], 1.0, 1e-8, "b[0] = 1");
    check_close(m.b[1], 1.0, 1e-8, "b[1] = 1");

    const auto m2 = baseline::var_fit(make_pairs(q0s, qTs));
    check(m.a == m2.a && m.b == m2.b, "refit on the same data is bit-identical");
}

void test_interpolation_and_orthogonality() {
    section("interpolation and normal equations");
    // d+1 = 3 generic pairs in 2-D: the affine fit interpolates exactly
    std::vector<std::vector<double>> q0s{{0.0, 0.0}, {1.0, 0.2}, {0.3, 1.4}};
    std::vector<std::vector<double>> qTs{{1.0, -1.0}, {0.5, 2.0}, {-2.0, 0.25}};
    const auto m = baseline::var_fit(make_pairs(q0s, qTs));
    double resid = 0.0;
    for (std::size_t i = 0; i < q0s.size(); ++i) {
        const auto p = baseline::var_apply(m, q0s[i]);
        for (std::size_t d = 0; d < 2; ++d)
            resid = std::max(resid, std::fabs(p[d] - qTs[i][d]));
    }
    check(resid < 1e-9, "d+1 generic pairs fit with zero residual (" + num(resid) + ")");

    // random data: residuals orthogonal to the regressors
    Rng rng(8);
    std::vector<std::vector<double>> r0, rT;
    for (int i = 0; i < 60; ++i) {
        r0.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        rT.push_back({rng.normal(), rng.normal()});
    }
    const auto ds = make_pairs(r0, rT);
    const auto mr = baseline::var_fit(ds);
    double dot_max = 0.0;
    for (std::size_t d = 0; d < 2; ++d) {
        double dx = 0.0, dy = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < r0.size(); ++i) {
            const auto p = baseline::var_apply(mr, r0[i]);
            const double r = rT[i][d] - p[d];
            dx += r * r0[i][0];
            dy += r * r0[i][1];
            d1 += r;
        }
        dot_max = std::max({dot_max, std::fabs(dx), std::fabs(dy), std::fabs(d1)});
    }
    check(dot_max < 1e-8, "residuals orthogonal to regressors (" + num(dot_max) + ")");

    check_throws<UsageError>(
        [&] { baseline::var_fit(make_pairs({{1.0, 2.0}}, {{1.0, 2.0}})); },
        "fewer than d+1 pairs rejected");

    // rank-deficient design engages the ridge fallback without hurting the
    // fit: identical regressors leave only the pooled-mean prediction
    std::vector<std::vector<double>> same(12, std::vector<double>{0.4, 0.8});
    std::vector<std::vector<double>> yT;
    Rng rng2(5);
    std::vector<double> y_mean(2, 0.0);
    for (int i = 0; i < 12; ++i) {
        yT.push_back({rng2.normal(), rng2.normal()});
        y_mean[0] += yT.back()[0] / 12.0;
        y_mean[1] += yT.back()[1] / 12.0;
    }
    const auto ridge = baseline::var_fit(make_pairs(same, yT));
    const auto pred = baseline::var_apply(ridge, same[0]);
    check(std::fabs(pred[0] - y_mean[0]) < 1e-4 && std::fabs(pred[1] - y_mean[1]) < 1e-4,
          "ridge fallback predicts the pooled mean on duplicated regressors");
}

void test_predict_and_rollout() {
    section("var_predict / var_rollout");
    baseline::VarModel ident;
    ident.dim = 2;
    ident.a = {1.0, 0.0, 0.0, 1.0};
    ident.b = {0.0, 0.0};

    Ensemble e;
    e.shape = Shape::vec(2);
    e.members = {{1.0, 2.0}, {3.0, 4.0}, {-1.0, 0.5}};
    const auto out = baseline::var_predict(ident, e);
    check(out.members == e.members, "identity model maps the ensemble to itself");

    baseline::VarModel m;
    m.dim = 2;
    m.a = {0.5, 0.1, -0.2, 0.9};
    m.b = {0.3, -0.1};
    Ensemble perm;
    perm.shape = e.shape;
    perm.members = {e.members[1], e.members[2], e.members[0]};
    const auto a1 = baseline::var_predict(m, e);
    const auto a2 = baseline::var_predict(m, perm);
    check(a2.members[0] == a1.members[1] && a2.members[1] == a1.members[2] &&
              a2.members[2] == a1.members[0],
          "memberwise permutation equivariance");

    const auto twice = baseline::var_rollout(m, e, 2);
    const auto once = baseline::var_predict(m, baseline::var_predict(m, e));
    check(twice.members == once.members, "rollout(2) equals predict twice");
}

void test_checkpoint() {
    section("VAR checkpoint");
    baseline::VarModel m;
    m.dim = 2;
    m.a = {0.25, -1.5, 2.0, 0.125};
    m.b = {3.5, -0.75};
    const auto path =
        (std::filesystem::temp_directory_path() / "flowcast_var.fmck").string();
    io::save_checkpoint(path, baseline::var_to_checkpoint(m));
    const auto ck = io::load_checkpoint(path);
    check(ck.kind == io::kKindVar, "kind tag VAR1");
    const auto back = baseline::var_from_checkpoint(ck);
    check(back.a == m.a && back.b == m.b, "matrix and intercept bit-identical");
    check_throws<UsageError>(
        [&] {
            auto wrong = ck;
            wrong.kind = io::kKindForecast;
            baseline::var_from_checkpoint(wrong);
        },
        "non-VAR checkpoint rejected");
    std::filesystem::remove(path);
}

}  // namespace

int main() {
    test_exact_affine();
    test_interpolation_and_orthogonality();
    test_predict_and_rollout();
    test_checkpoint();
    return summary("baseline");
}
