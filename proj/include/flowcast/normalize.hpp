#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace flowcast {

/// Per-dimension affine normalization x -> (x - mean) / stdev. Constant
/// dimensions (population stdev 0) are flagged and mapped with stdev 1 so
/// the transform stays invertible.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stdev;
    std::vector<std::uint8_t> constant;

    std::size_t dim() const { return mean.size(); }
    bool empty() const { return mean.empty(); }

    static NormStats identity(std::size_t d);

    /// Fit from flat row-major samples (count x dim). Population stdev.
    static NormStats fit(std::span<const double> data, std::size_t dim);

    void normalize(std::span<double> x) const;
    void denormalize(std::span<double> x) const;
    std::vector<double> normalized(std::span<const double> x) const;
    std::vector<double> denormalized(std::span<const double> x) const;
};

}  // namespace flowcast
