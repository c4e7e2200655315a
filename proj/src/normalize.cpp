#include "flowcast/normalize.hpp"

#include <cmath>

#include "flowcast/errors.hpp"

namespace flowcast {

NormStats NormStats::identity(std::size_t d) {
    NormStats s;
    s.mean.assign(d, 0.0);
    s.stdev.assign(d, 1.0);
    s.constant.assign(d, 0);
    return s;
}

NormStats NormStats::fit(std::span<const double> data, std::size_t dim) {
    if (dim == 0) throw ConfigError("NormStats::fit: zero dimension");
    if (data.empty() || data.size() % dim != 0)
        throw ShapeError("NormStats::fit: data size is not a multiple of dim");
    const std::size_t count = data.size() / dim;

    NormStats s;
    s.mean.assign(dim, 0.0);
    s.stdev.assign(dim, 0.0);
    s.constant.assign(dim, 0);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t d = 0; d < dim; ++d) s.mean[d] += data[i * dim + d];
    for (std::size_t d = 0; d < dim; ++d) s.mean[d] /= static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            const double r = data[i * dim + d] - s.mean[d];
            s.stdev[d] += r * r;
        }
    for (std::size_t d = 0; d < dim; ++d) {
        s.stdev[d] = std::sqrt(s.stdev[d] / static_cast<double>(count));
        if (!std::isfinite(s.mean[d]) || !std::isfinite(s.stdev[d]))
            throw ConfigError("NormStats::fit: non-finite statistics");
        // spreads at accumulated-rounding scale are constant dimensions;
        // dividing by them would only amplify noise
        if (s.stdev[d] <= 1e-12 * std::max(std::fabs(s.mean[d]), 1.0)) {
            s.stdev[d] = 1.0;
            s.constant[d] = 1;
        }
    }
    return s;
}

void NormStats::normalize(std::span<double> x) const {
    if (x.size() != dim()) throw ShapeError("normalize: dimension mismatch");
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = (x[d] - mean[d]) / stdev[d];
}

void NormStats::denormalize(std::span<double> x) const {
    if (x.size() != dim()) throw ShapeError("denormalize: dimension mismatch");
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = x[d] * stdev[d] + mean[d];
}

std::vector<double> NormStats::normalized(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    normalize(out);
    return out;
}

std::vector<double> NormStats::denormalized(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    denormalize(out);
    return out;
}

}  // namespace flowcast
