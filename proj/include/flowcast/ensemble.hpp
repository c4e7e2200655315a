#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowcast/shape.hpp"

namespace flowcast {

/// Provenance carried with every ensemble file.
struct EnsembleMeta {
    std::string source;       // "dataset-q0", "perturb", "forecast", ...
    std::uint64_t seed = 0;
    double sigma = 0.0;
    std::string family;       // noise family for perturbed ensembles
    double horizon = 0.0;
    int steps = 0;            // integration steps used to produce it
    std::string source_hash;  // hash of the state a perturbed ensemble grew from
};

/// Ordered collection of states sampled from one distribution.
struct Ensemble {
    Shape shape;
    std::vector<std::vector<double>> members;
    EnsembleMeta meta;

    std::size_t size() const { return members.size(); }
    std::size_t dim() const { return shape.size(); }

    /// Throws unless there is at least one member and every member is a
    /// finite state of the declared shape.
    void validate() const;
};

/// FNV-1a over the raw bytes of a state, as a hex string.
std::string state_hash(const std::vector<double>& state);

}  // namespace flowcast
