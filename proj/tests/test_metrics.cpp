// Metric definitions against flat-loop oracles, the analytic constant-image
// SSIM value, and the permutation/identity properties of compare().

#include "flowcast/errors.hpp"
#include "flowcast/metrics.hpp"
#include "flowcast/rng.hpp"
#include "test_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace flowcast;
using namespace flowcast::test;

namespace {

Ensemble random_ensemble(const Shape& shape, std::size_t m, Rng& rng) {
    Ensemble e;
    e.shape = shape;
    e.members.resize(m);
    for (auto& mem : e.members) {
        mem.resize(shape.size());
        for (double& v : mem) v = rng.uniform();
    }
    return e;
}

void test_mean_sd_state() {
    section("ensemble mean/sd state");
    Ensemble e;
    e.shape = Shape::vec(2);
    e.members = {{0.0, 0.0}, {2.0, 4.0}};
    check(metrics::ensemble_mean_state(e) == std::vector<double>({1.0, 2.0}),
          "mean of {(0,0),(2,4)} is (1,2)");
    const auto sd = metrics::ensemble_sd_state(e);
    check_close(sd[0], 1.0, 1e-15, "population sd of {0,2} is 1");
    check_close(sd[1], 2.0, 1e-15, "population sd of {0,4} is 2");

    Ensemble single;
    single.shape = Shape::vec(3);
    single.members = {{5.0, -1.0, 0.5}};
    check(metrics::ensemble_mean_state(single) == single.members[0],
          "M=1 mean is the member itself");
    check(metrics::ensemble_sd_state(single) == std::vector<double>(3, 0.0),
          "M=1 sd is zero");

    Ensemble same;
    same.shape = Shape::vec(2);
    same.members = {{1.5, 2.5}, {1.5, 2.5}, {1.5, 2.5}};
    check(metrics::ensemble_sd_state(same) == std::vector<double>(2, 0.0),
          "identical members give the zero sd state");

    // flat-loop oracle over random ensembles
    Rng rng(3);
    double worst = 0.0;
    for (int round = 0; round < 6; ++round) {
        const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 48);
        const auto shape = round % 2 == 0 ? Shape::vec(5) : Shape::grid(16, 16, 3);
        const auto e2 = random_ensemble(shape, m, rng);
        const auto mean = metrics::ensemble_mean_state(e2);
        const auto sd2 = metrics::ensemble_sd_state(e2);
        for (std::size_t d = 0; d < shape.size(); ++d) {
            double acc = 0.0;
            for (const auto& mem : e2.members) acc += mem[d];
            const double m0 = acc / static_cast<double>(m);
            double v0 = 0.0;
            for (const auto& mem : e2.members) v0 += (mem[d] - m0) * (mem[d] - m0);
            const double s0 = std::sqrt(v0 / static_cast<double>(m));
            worst = std::max(worst, std::fabs(mean[d] - m0));
            worst = std::max(worst, std::fabs(sd2[d] - s0));
        }
    }
    check(worst < 1e-12, "oracle equivalence to 1e-12 (worst " + num(worst) + ")");

    Ensemble empty;
    empty.shape = Shape::vec(2);
    check_throws<UsageError>([&] { metrics::ensemble_mean_state(empty); },
                             "empty ensemble rejected");
}

void test_scores() {
    section("mean/std score");
    Ensemble constant;
    constant.shape = Shape::vec(4);
    constant.members = {std::vector<double>(4, 2.5), std::vector<double>(4, 2.5)};
    check(metrics::mean_score(constant) == 2.5, "constant ensemble mean score");
    check(metrics::std_score(constant) == 0.0, "constant ensemble std score");

    Rng rng(9);
    const auto e = random_ensemble(Shape::grid(8, 8), 20, rng);
    const double ms = metrics::mean_score(e);
    const double ss = metrics::std_score(e);
    double acc = 0.0, acc2 = 0.0;
    for (const auto& mem : e.members)
        for (double v : mem) {
            acc += v;
            acc2 += v * v;
        }
    const double n = static_cast<double>(e.size() * e.dim());
    check_close(ms, acc / n, 1e-13, "mean score oracle");
    // second-moment identity: std^2 + mean^2 = pooled second moment
    check_close(ss * ss + ms * ms, acc2 / n, 1e-10, "second-moment identity");
}

void test_mse_mae() {
    section("mse / mae");
    const std::vector<double> a{1.0, 2.0, 3.0};
    check(metrics::mse(a, a) == 0.0 && metrics::mae(a, a) == 0.0, "a=b gives 0/0");
    std::vector<double> b{3.0, 4.0, 5.0};
    check(metrics::mse(a, b) == 4.0, "b=a+2 gives mse 4");
    check(metrics::mae(a, b) == 2.0, "b=a+2 gives mae 2");
    check_throws<ShapeError>(
        [&] { metrics::mse(a, std::vector<double>{1.0}); }, "dim mismatch");
}

void test_ssim() {
    section("ssim");
    Rng rng(5);
    const auto shape = Shape::grid(16, 16);
    std::vector<double> x(shape.size());
    for (double& v : x) v = rng.uniform();
    check(metrics::ssim(x, x, shape) == 1.0, "ssim(x,x) is exactly 1");

    // constant images 0 and 1: closed form C1 / (1 + C1) with C1 = 1e-4
    const std::vector<double> zeros(64, 0.0), ones(64, 1.0);
    const double expect = 1e-4 / (1.0 + 1e-4);
    check_close(metrics::ssim(zeros, ones, Shape::grid(8, 8)), expect, 1e-18,
                "constant-image closed form");

    std::vector<double> y(shape.size());
    for (double& v : y) v = rng.uniform();
    check(metrics::ssim(x, y, shape) == metrics::ssim(y, x, shape), "symmetry");
    const double s = metrics::ssim(x, y, shape);
    check(s >= -1.0 && s <= 1.0, "result within [-1, 1]");
    check(s < 1.0, "distinct images score below 1");

    check_throws<UsageError>(
        [&] { metrics::ssim(std::vector<double>(16, 0.0), std::vector<double>(16, 0.0),
                            Shape::grid(4, 4)); },
        "grids smaller than one window rejected");
    check(!metrics::ssim_defined(Shape::vec(2)), "ssim undefined for vector states");
    check(metrics::ssim_defined(Shape::grid(8, 8)), "ssim defined for 8x8 grids");
}

void test_compare() {
    section("compare");
    Rng rng(31);
    const auto truth = random_ensemble(Shape::grid(8, 8), 12, rng);
    const auto self = metrics::compare(truth, truth);
    check(self.mean_state_mse == 0.0 && self.mean_state_mae == 0.0 &&
              self.sd_state_mse == 0.0 && self.sd_state_mae == 0.0,
          "self comparison has zero errors");
    check(self.mean_score_pred == self.mean_score_true &&
              self.std_score_pred == self.std_score_true,
          "self comparison scores equal");
    check(self.mean_state_ssim && *self.mean_state_ssim == 1.0 &&
              self.sd_state_ssim && *self.sd_state_ssim == 1.0,
          "self comparison ssim is 1 where defined");

    // member permutation invariance of every field
    auto pred = random_ensemble(Shape::grid(8, 8), 12, rng);
    const auto base = metrics::compare(pred, truth);
    auto pred_shuffled = pred;
    std::rotate(pred_shuffled.members.begin(), pred_shuffled.members.begin() + 5,
                pred_shuffled.members.end());
    auto truth_shuffled = truth;
    std::reverse(truth_shuffled.members.begin(), truth_shuffled.members.end());
    const auto shuf = metrics::compare(pred_shuffled, truth_shuffled);
    // summation order changes with the permutation, so compare to rounding
    auto close = [](double x, double y) {
        return std::fabs(x - y) <= 1e-12 * std::max({std::fabs(x), std::fabs(y), 1.0});
    };
    check(close(base.mean_state_mse, shuf.mean_state_mse) &&
              close(base.mean_state_mae, shuf.mean_state_mae) &&
              close(base.sd_state_mse, shuf.sd_state_mse) &&
              close(base.sd_state_mae, shuf.sd_state_mae) &&
              close(base.mean_score_pred, shuf.mean_score_pred) &&
              close(base.std_score_pred, shuf.std_score_pred) &&
              close(*base.mean_state_ssim, *shuf.mean_state_ssim) &&
              close(*base.sd_state_ssim, *shuf.sd_state_ssim),
          "report invariant under member permutation");

    // vector states: SSIM columns absent, CSV emits NA
    Ensemble va = random_ensemble(Shape::vec(2), 6, rng);
    Ensemble vb = random_ensemble(Shape::vec(2), 6, rng);
    const auto vr = metrics::compare(va, vb);
    check(!vr.mean_state_ssim && !vr.sd_state_ssim, "ssim absent for vector states");
    const auto row = metrics::report_csv_row(vr);
    check(std::count(row.begin(), row.end(), ',') == 9, "CSV row has 10 columns");
    check(row.find("NA") != std::string::npos, "CSV emits NA for undefined ssim");

    Ensemble wrong = random_ensemble(Shape::vec(3), 6, rng);
    check_throws<ShapeError>([&] { metrics::compare(va, wrong); },
                             "shape mismatch rejected");
}

}  // namespace

int main() {
    test_mean_sd_state();
    test_scores();
    test_mse_mae();
    test_ssim();
    test_compare();
    return summary("metrics");
}
