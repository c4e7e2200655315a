#pragma once

#include <span>
#include <vector>

#include "flowcast/dynamics.hpp"
#include "flowcast/ensemble.hpp"
#include "flowcast/io.hpp"

namespace flowcast::baseline {

/// Single-lag vector autoregression q -> A q + b.
struct VarModel {
    std::size_t dim = 0;
    std::vector<double> a;  // dim x dim, row-major
    std::vector<double> b;  // dim

    void validate() const;
};

/// Ordinary least squares over the dataset's (q0, qT) pairs. Needs at
/// least dim + 1 pairs; a near-singular normal matrix falls back to ridge
/// regularization with lambda = 1e-8 once before failing.
/// `with_intercept = false` fits the drift-free form qT ~ A q0 (b = 0),
/// the classic rolled-out autoregression baseline.
VarModel var_fit(const dynamics::Dataset& dataset, bool with_intercept = true);

std::vector<double> var_apply(const VarModel& model, std::span<const double> q);

/// Memberwise affine map of an ensemble.
Ensemble var_predict(const VarModel& model, const Ensemble& e0);

/// Memberwise k-fold application: the fitted one-step map iterated to a
/// longer horizon.
Ensemble var_rollout(const VarModel& model, const Ensemble& e0,
                     std::size_t applications);

io::Checkpoint var_to_checkpoint(const VarModel& model);
VarModel var_from_checkpoint(const io::Checkpoint& ck);

}  // namespace flowcast::baseline
