#include "flowcast/perturb.hpp"

#include <cmath>

#include "flowcast/errors.hpp"
#include "flowcast/integrate.hpp"
#include "flowcast/rng.hpp"

namespace flowcast::perturb {

void NoiseSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw ConfigError("noise sigma must be finite and >= 0");
}

std::string family_name(NoiseSpec::Family f) {
    switch (f) {
        case NoiseSpec::Family::normal: return "normal";
        case NoiseSpec::Family::uniform: return "uniform";
        case NoiseSpec::Family::constant: return "constant";
    }
    return "?";
}

NoiseSpec::Family family_from_name(const std::string& name) {
    if (name == "normal") return NoiseSpec::Family::normal;
    if (name == "uniform") return NoiseSpec::Family::uniform;
    if (name == "constant") return NoiseSpec::Family::constant;
    throw ConfigError("unknown noise family '" + name +
                      "' (use normal, uniform or constant)");
}

namespace {

void require_gaussify(const flow::VelocityField& field, const char* op) {
    if (field.kind != flow::FieldKind::gaussify)
        throw UsageError(std::string(op) + " requires a gaussify field");
}

}  // namespace

std::vector<double> encode(const flow::VelocityField& field,
                           std::span<const double> q0, std::size_t n_steps) {
    require_gaussify(field, "encode");
    return integrate::euler_forward(field, q0, n_steps);
}

std::vector<double> perturb_latent(std::span<const double> z,
                                   const NoiseSpec& spec,
                                   std::uint64_t member_index) {
    spec.validate();
    std::vector<double> out(z.begin(), z.end());
    if (spec.sigma == 0.0) return out;
    Rng rng = Rng::derive(spec.seed, member_index);
    switch (spec.family) {
        case NoiseSpec::Family::normal:
            for (double& v : out) v += spec.sigma * rng.normal();
            break;
        case NoiseSpec::Family::uniform:
            // sigma-scaled U(0,1) offsets; mean sigma/2, spread sigma/sqrt(12)
            for (double& v : out) v += spec.sigma * rng.uniform();
            break;
        case NoiseSpec::Family::constant:
            for (double& v : out) v += spec.sigma;
            break;
    }
    return out;
}

std::vector<double> decode(const flow::VelocityField& field,
                           std::span<const double> z, std::size_t n_steps) {
    require_gaussify(field, "decode");
    return integrate::euler_reverse(field, z, n_steps);
}

Ensemble gen_perturbed_ensemble(const flow::VelocityField& field,
                                std::span<const double> q0,
                                const NoiseSpec& spec, std::size_t n_members,
                                std::size_t n_steps, const Shape& shape) {
    require_gaussify(field, "gen_perturbed_ensemble");
    spec.validate();
    if (n_members < 1) throw UsageError("need at least one member");

    const std::vector<double> z = encode(field, q0, n_steps);

    Ensemble e;
    e.shape = shape.size() == q0.size() ? shape : Shape::vec(q0.size());
    e.meta.source = "perturb";
    e.meta.seed = spec.seed;
    e.meta.sigma = spec.sigma;
    e.meta.family = family_name(spec.family);
    e.meta.steps = static_cast<int>(n_steps);
    e.meta.source_hash = state_hash(std::vector<double>(q0.begin(), q0.end()));
    e.members.resize(n_members);
    for (std::size_t i = 0; i < n_members; ++i) {
        const std::vector<double> zi = perturb_latent(z, spec, i);
        try {
            e.members[i] = decode(field, zi, n_steps);
        } catch (const DivergenceError& err) {
            throw DivergenceError("perturbed member " + std::to_string(i) + ": " +
                                  err.what());
        }
    }
    return e;
}

}  // namespace flowcast::perturb
