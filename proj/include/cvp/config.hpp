#pragma once

#include <string>

#include "cvp/bench.hpp"

namespace cvp {

/// Parses a pooling given on the command line: "max", "minkowski:P",
/// "top_x:X", "top_x:X:binned", "cvp". Throws ConfigError on anything else.
PoolingSpec parse_pooling_string(const std::string& text);

/// Loads a bench config JSON file:
/// {
///   "estimators": [ {"method": "...", "pooling": {...},
///                    "sigma": ..., "k_surround": ...}, ... ],
///   "parallelism": 1,
///   "seed": 0,
///   "synthetic": {"count": N, "spec": { scene-spec fields }}
/// }
/// Pooling objects: {"kind": "max"} | {"kind": "minkowski", "p": P}
/// | {"kind": "top_x", "x": X, "binned": false} | {"kind": "cvp",
///   "sigma": 3, "c_min": 0.01, "x_min": 0.1, "x_max": 100}.
/// Unknown keys are rejected. manifest_path/output_path are left empty for
/// the caller to fill from the command line.
RunConfig load_run_config(const std::string& path);

/// Loads a sweep grid JSON file: {"sigmas": [...], "ks": [...],
/// "methods": [...], "poolings": ["max", "cvp"]}.
SweepGrid load_sweep_grid(const std::string& path);

/// Loads a synthetic-scene spec JSON file with the SyntheticSceneSpec fields
/// (width, height, patch_rows, patch_cols, illuminant_min, illuminant_max,
/// noise_sigma, salt_fraction, white_patch); all optional, defaults apply.
SyntheticSceneSpec load_scene_spec(const std::string& path);

}  // namespace cvp
