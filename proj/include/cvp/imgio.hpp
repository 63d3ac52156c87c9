#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvp/types.hpp"

namespace cvp {

/// Preprocessing applied when decoding a raster file.
///
/// Order of operations: saturation flagging (on raw values, relative to the
/// raw maximum), black-level subtraction clamped at zero, normalization by
/// (max_raw - black_level), mask exclusion, then optional gamma decoding.
struct PreprocessSpec {
    double black_level = 0.0;             // raw units
    double saturation_threshold = 0.98;   // fraction of max_raw; raw >= t*max_raw is flagged
    std::optional<std::string> mask_path; // grayscale image, nonzero pixels excluded
    std::optional<double> gamma_decode;   // applied as v^gamma after normalization
};

struct ManifestEntry {
    std::string image_path;
    Illuminant ground_truth;  // unit length
    PreprocessSpec preprocess;
};

/// Decodes PPM/PGM (P2/P3/P5/P6, 8/16-bit) or PNG (8/16-bit, gray or RGB)
/// and applies preprocessing. Throws DataError on unreadable or fully
/// invalid inputs, ConfigError on an invalid spec.
Image load_image(const std::string& path, const PreprocessSpec& spec = {});

/// Writes an 8-bit PPM or PNG (chosen by file extension). Values are clamped
/// to [0,1] and quantized by round(v*255). An applied illuminant, when given,
/// is recorded as file metadata.
void save_image(const Image& img, const std::optional<Illuminant>& illum_applied,
                const std::string& path);

/// Parses a JSON manifest: an array of {"image", "illuminant", "black_level"?,
/// "saturation"?, "mask"?} records. Relative paths are resolved against the
/// manifest's directory; illuminants are renormalized to unit length.
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace cvp
