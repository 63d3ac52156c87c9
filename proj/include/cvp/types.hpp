#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvp {

// Malformed configuration or CLI usage. Mapped to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unusable input data (bad file, degenerate image, ...). Mapped to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Single-channel row-major raster of doubles.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    Raster() = default;
    Raster(int w, int h, double fill = 0.0)
        : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

    double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return v.size(); }
};

/// RGB illuminant direction. Estimators return it unit-normalized.
struct Illuminant {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
    double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }

    double norm() const { return std::sqrt(r * r + g * g + b * b); }
    double dot(const Illuminant& o) const { return r * o.r + g * o.g + b * o.b; }

    Illuminant normalized() const {
        const double n = norm();
        if (n == 0.0 || !std::isfinite(n))
            throw DataError("cannot normalize zero or non-finite illuminant");
        return {r / n, g / n, b / n};
    }
};

/// Linear-light planar RGB image in [0,1] with a per-pixel usability mask.
struct Image {
    int width = 0;
    int height = 0;
    std::array<Raster, 3> channels;
    std::vector<uint8_t> valid;  // 1 = usable for pooling
    int bit_depth_origin = 8;    // provenance only

    bool valid_at(int x, int y) const { return valid[static_cast<size_t>(y) * width + x] != 0; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    long valid_count() const {
        long n = 0;
        for (uint8_t m : valid) n += m != 0;
        return n;
    }
};

}  // namespace cvp
