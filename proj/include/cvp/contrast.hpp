#pragma once

#include <array>
#include <cstdint>

#include "cvp/filters.hpp"
#include "cvp/types.hpp"

namespace cvp {

/// Per-channel local standard deviation. Values lie in [0, 0.5] for data in
/// [0,1] and are exactly 0 over constant neighborhoods.
struct ContrastMap {
    int width = 0;
    int height = 0;
    std::array<Raster, 3> channels;
    std::vector<uint8_t> valid;

    bool valid_at(int x, int y) const { return valid[static_cast<size_t>(y) * width + x] != 0; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

/// Parameters of contrast-variant pooling: the neighborhood half-width for
/// the local-deviation window, the contrast floor that bounds the inverse,
/// and the clamp range for the resulting percentage.
struct CvpConfig {
    int sigma = 3;        // window is (2*sigma+1)^2, intersected with the raster
    double c_min = 0.01;  // per-pixel contrast floor, in (0, 0.5]
    double x_min = 0.1;   // percent
    double x_max = 100.0; // percent

    void validate() const;  // throws ConfigError
};

/// Population standard deviation over the square window of half-width sigma
/// around each pixel, window clipped to the raster. Invalid input pixels are
/// excluded from both the mean and the deviation sum; an output pixel is
/// invalid if its window holds fewer than 2 valid samples (or the pixel
/// itself was invalid). Throws ConfigError for sigma < 1.
ContrastMap local_contrast(const FeatureMap& map, int sigma);
ContrastMap local_contrast(const Image& img, int sigma);

/// Adaptive pooling percentage, one per channel:
///   x_c = clamp( mean over valid pixels of 1/max(C_c, c_min), x_min, x_max )
/// in percent units. Low contrast drives x_c up (toward mean pooling), high
/// contrast drives it down (toward max pooling). Throws DataError when a
/// channel has no valid contrast samples.
std::array<double, 3> cvp_percentage(const ContrastMap& cmap, const CvpConfig& cfg);

}  // namespace cvp
