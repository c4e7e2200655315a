#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowcast/ensemble.hpp"
#include "flowcast/flow.hpp"

namespace flowcast::perturb {

/// Latent-space noise specification. `normal` adds sigma * N(0, I),
/// `uniform` adds sigma * U(0, 1) per component, `constant` adds the fixed
/// offset sigma to every component.
struct NoiseSpec {
    enum class Family { normal, uniform, constant };
    Family family = Family::normal;
    double sigma = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

std::string family_name(NoiseSpec::Family f);
NoiseSpec::Family family_from_name(const std::string& name);

/// Encode a data-space state into the latent Gaussian (forward integration
/// under a gaussify field). Throws UsageError for other field kinds.
std::vector<double> encode(const flow::VelocityField& field,
                           std::span<const double> q0, std::size_t n_steps);

/// z + sigma * noise, drawn from the substream (spec.seed, member_index).
std::vector<double> perturb_latent(std::span<const double> z,
                                   const NoiseSpec& spec,
                                   std::uint64_t member_index = 0);

/// Decode a latent point back to data space (reverse integration).
std::vector<double> decode(const flow::VelocityField& field,
                           std::span<const double> z, std::size_t n_steps);

/// Encode once, draw M independent latent perturbations, decode each.
/// `shape` labels the members for grid states; defaults to a flat vector.
Ensemble gen_perturbed_ensemble(const flow::VelocityField& field,
                                std::span<const double> q0,
                                const NoiseSpec& spec, std::size_t n_members,
                                std::size_t n_steps, const Shape& shape = {});

}  // namespace flowcast::perturb
