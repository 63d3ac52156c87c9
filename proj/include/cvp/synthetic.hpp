#pragma once

#include <cstdint>

#include "cvp/types.hpp"

namespace cvp {

/// Parameters of a generated Mondrian test scene: a grid of flat random
/// reflectance patches rendered under a random illuminant (componentwise
/// multiplication), with optional Gaussian noise and salt pixels.
struct SyntheticSceneSpec {
    int width = 64;
    int height = 64;
    int patch_rows = 4;
    int patch_cols = 4;
    double illuminant_min = 0.2;  // per-component range the illuminant is drawn from
    double illuminant_max = 1.0;
    double noise_sigma = 0.0;     // additive Gaussian noise, fraction of full scale, in [0,1)
    double salt_fraction = 0.0;   // probability a pixel is overwritten with (1,1,1), in [0,1)
    bool white_patch = true;      // force one patch to perfect white reflectance

    void validate() const;  // throws ConfigError
};

struct SyntheticScene {
    Image image;
    Illuminant illuminant;  // unit-norm ground truth the scene was rendered under
};

/// Deterministic scene generation: a given (spec, seed) pair always produces
/// the same image within a build (all randomness flows from a fixed-order
/// integer stream; only libm differences can vary the last bits across
/// toolchains). Draw order is fixed: illuminant,
/// patch reflectances (row-major), white-patch index, per-pixel noise
/// (row-major, r/g/b), salt selection. Noise is clamped to keep values in
/// [0,1]; salt pixels are set after noise and stay valid in the mask.
SyntheticScene generate_synthetic(const SyntheticSceneSpec& spec, uint64_t seed);

/// Stateless seed scrambler used to derive independent per-image seeds from
/// a corpus base seed: seed_i = mix_seed(base, i).
uint64_t mix_seed(uint64_t base, uint64_t index);

}  // namespace cvp
