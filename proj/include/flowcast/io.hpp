#pragma once

#include <array>
#include <string>
#include <vector>

#include "flowcast/dynamics.hpp"
#include "flowcast/ensemble.hpp"
#include "flowcast/nn.hpp"
#include "flowcast/normalize.hpp"

namespace flowcast::io {

/// Writes bytes to path via a temp file + rename in the same directory.
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

// ---------------------------------------------------------------------------
// FMCK checkpoint container: magic "FMCK", u32 version=1, 4-char kind tag,
// u32 activation tag, u32 layer count, u32 dims, little-endian f64
// weight/bias blocks in layer order, then normalization stats and horizon.
// ---------------------------------------------------------------------------

inline constexpr char kKindNet[] = "NNET";
inline constexpr char kKindForecast[] = "FRCT";
inline constexpr char kKindGaussify[] = "GSSY";
inline constexpr char kKindVar[] = "VAR1";

struct Checkpoint {
    std::string kind = kKindNet;  // exactly 4 characters
    nn::ModelParams params;
    NormStats norm;  // empty when the model carries none
    double horizon = 0.0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// FMDS state container: magic "FMDS", u32 version=1, u32 C,H,W (1s for
// vectors), u64 count, f64 horizon, then records as contiguous little-endian
// f64. Datasets store (q0, qT) pairs per record; ensembles store one state
// per record; the record arity is recovered from the payload size and the
// sidecar "<path>.meta" text block.
// ---------------------------------------------------------------------------

void save_dataset(const std::string& path, const dynamics::Dataset& ds);
dynamics::Dataset load_dataset(const std::string& path);

void save_ensemble(const std::string& path, const Ensemble& e);
Ensemble load_ensemble(const std::string& path);

/// Rows "q0_1,..,q0_d,qT_1,..,qT_d"; meant for small vector states.
void export_dataset_csv(const std::string& path, const dynamics::Dataset& ds);
/// Rows "y1,..,yd".
void export_ensemble_csv(const std::string& path, const Ensemble& e);

/// Minimal SVG scatter plot; one series per entry of `series`.
struct ScatterSeries {
    std::string label;
    std::string color;
    std::vector<std::array<double, 2>> points;
};
void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterSeries>& series);

}  // namespace flowcast::io
