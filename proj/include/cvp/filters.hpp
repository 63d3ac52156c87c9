#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cvp/types.hpp"

namespace cvp {

/// Sampled 1-D Gaussian (or Gaussian-derivative) filter. Taps cover signed
/// offsets -radius..radius with radius = ceil(3*sigma).
///
/// Normalization:
///   order 0: sum of taps = 1 (DC gain 1)
///   order 1: taps antisymmetric, sum = 0, sum(taps[i]*i) = -1
///            (response to the increasing ramp f(i)=i is -1)
///   order 2: sum = 0, sum(taps[i]*i^2) = 2 (response to f(i)=i^2 is 2)
struct Kernel1D {
    std::vector<double> taps;
    int order = 0;
    double sigma = 0.0;

    int radius() const { return static_cast<int>(taps.size() / 2); }

    /// Single unit tap; applying it leaves a raster bit-identical.
    static Kernel1D identity() { return Kernel1D{{1.0}, 0, 0.0}; }
};

/// Non-negative per-channel response map pooled by the estimators. Same
/// dimensions as the source image; the mask marks pixels whose response is
/// trustworthy (source-valid and far enough from the border that filter
/// support never crossed it).
struct FeatureMap {
    int width = 0;
    int height = 0;
    std::array<Raster, 3> channels;
    std::vector<uint8_t> valid;

    bool valid_at(int x, int y) const { return valid[static_cast<size_t>(y) * width + x] != 0; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    long valid_count() const {
        long n = 0;
        for (uint8_t m : valid) n += m != 0;
        return n;
    }
};

/// Filter support radius used throughout: ceil(3*sigma).
int kernel_radius(double sigma);

/// Samples G, G' or G'' at integer offsets and normalizes per the Kernel1D
/// contract. Throws ConfigError for sigma <= 0 or an unsupported order.
Kernel1D gaussian_kernel(double sigma, int order);

/// Separable filtering: row pass with kx, then column pass with ky, each pass
/// correlating taps against the signal (no kernel flip) with reflect-101
/// border handling (the edge sample is not duplicated).
Raster convolve_separable(const Raster& channel, const Kernel1D& kx, const Kernel1D& ky);

/// Gradient-magnitude feature map. order 1: sqrt(gx^2+gy^2) of the
/// sigma-smoothed channel; order 2: sqrt(gxx^2+gxy^2+gyy^2) with the cross
/// term counted once. The mask drops source-invalid pixels and a frame of
/// width kernel_radius(sigma).
FeatureMap edge_feature_map(const Image& img, double sigma, int order);

/// Center-surround response: channel*G(sigma) - k_surround*channel*G(surround_ratio*sigma).
/// May be negative. Throws ConfigError for sigma <= 0 or surround_ratio <= 1.
Raster dog_response(const Raster& channel, double sigma, double surround_ratio, double k_surround);

/// Wraps image intensities as a FeatureMap (the trivial feature used by
/// White-Patch and Grey-World); mask copied as-is.
FeatureMap image_as_feature_map(const Image& img);

}  // namespace cvp
