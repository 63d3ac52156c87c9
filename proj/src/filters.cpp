#include "cvp/filters.hpp"

#include <algorithm>
#include <cmath>

namespace cvp {

int kernel_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

Kernel1D gaussian_kernel(double sigma, int order) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw ConfigError("gaussian kernel requires sigma > 0");
    if (order < 0 || order > 2) throw ConfigError("gaussian kernel order must be 0, 1 or 2");

    const int r = kernel_radius(sigma);
    const int n = 2 * r + 1;
    Kernel1D k;
    k.order = order;
    k.sigma = sigma;
    k.taps.assign(n, 0.0);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

    if (order == 0) {
        double sum = 0.0;
        for (int i = -r; i <= r; ++i) {
            const double g = std::exp(-i * i * inv2s2);
            k.taps[i + r] = g;
            sum += g;
        }
        for (double& t : k.taps) t /= sum;
    } else if (order == 1) {
        // Sample -i/sigma^2 * G(i); enforce antisymmetry structurally, then
        // scale so the response to the ramp f(i)=i is exactly -1.
        double moment = 0.0;  // sum taps[i]*i
        for (int i = 1; i <= r; ++i) {
            const double d = -(i / (sigma * sigma)) * std::exp(-i * i * inv2s2);
            k.taps[r + i] = d;
            k.taps[r - i] = -d;
            moment += 2.0 * d * i;
        }
        if (!(moment < 0.0))
            throw ConfigError("sigma too small: derivative kernel underflows");
        for (double& t : k.taps) t /= -moment;
    } else {
        // Sample G''(i), subtract the mean so the taps sum to zero, then
        // scale so the response to f(i)=i^2 is exactly 2.
        double sum = 0.0;
        for (int i = -r; i <= r; ++i) {
            const double g = std::exp(-i * i * inv2s2);
            const double d2 = (i * i / (sigma * sigma) - 1.0) / (sigma * sigma) * g;
            k.taps[i + r] = d2;
            sum += d2;
        }
        const double mean = sum / n;
        double moment2 = 0.0;  // sum taps[i]*i^2 after centering
        for (int i = -r; i <= r; ++i) {
            k.taps[i + r] -= mean;
            moment2 += k.taps[i + r] * i * i;
        }
        if (!(moment2 > 0.0))
            throw ConfigError("sigma too small: second-derivative kernel underflows");
        const double scale = 2.0 / moment2;
        for (double& t : k.taps) t *= scale;
    }
    return k;
}

namespace {

// reflect-101 index: ... 2 1 | 0 1 2 3 | 2 1 ... (edge sample not repeated)
inline int reflect101(int t, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    t %= period;
    if (t < 0) t += period;
    return t < n ? t : period - t;
}

// One correlation pass along a row or column; taps indexed by signed offset.
void correlate_line(const double* in, int n, int stride, const std::vector<double>& taps, int r,
                    double* out, int out_stride) {
    for (int x = 0; x < n; ++x) {
        double acc = 0.0;
        for (int j = -r; j <= r; ++j) {
            const int t = reflect101(x + j, n);
            acc += taps[j + r] * in[static_cast<size_t>(t) * stride];
        }
        out[static_cast<size_t>(x) * out_stride] = acc;
    }
}

}  // namespace

Raster convolve_separable(const Raster& channel, const Kernel1D& kx, const Kernel1D& ky) {
    if (channel.width < 1 || channel.height < 1)
        throw DataError("cannot filter an empty raster");
    const int w = channel.width, h = channel.height;

    Raster mid(w, h);
    const int rx = kx.radius();
    for (int y = 0; y < h; ++y)
        correlate_line(&channel.v[static_cast<size_t>(y) * w], w, 1, kx.taps, rx,
                       &mid.v[static_cast<size_t>(y) * w], 1);

    Raster out(w, h);
    const int ry = ky.radius();
    for (int x = 0; x < w; ++x)
        correlate_line(&mid.v[x], h, w, ky.taps, ry, &out.v[x], w);
    return out;
}

FeatureMap image_as_feature_map(const Image& img) {
    FeatureMap m;
    m.width = img.width;
    m.height = img.height;
    m.channels = img.channels;
    m.valid = img.valid;
    return m;
}

namespace {

// Valid mask: source validity minus a frame of the given width, inside which
// filter support reached past the raster and touched reflected data.
std::vector<uint8_t> erode_frame(const std::vector<uint8_t>& src, int w, int h, int border) {
    std::vector<uint8_t> out(src.size(), 0);
    for (int y = border; y < h - border; ++y)
        for (int x = border; x < w - border; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            out[i] = src[i];
        }
    return out;
}

}  // namespace

FeatureMap edge_feature_map(const Image& img, double sigma, int order) {
    if (order != 1 && order != 2) throw ConfigError("edge feature map order must be 1 or 2");
    const Kernel1D g0 = gaussian_kernel(sigma, 0);
    const Kernel1D g1 = gaussian_kernel(sigma, 1);

    FeatureMap m;
    m.width = img.width;
    m.height = img.height;
    for (int c = 0; c < 3; ++c) {
        const Raster& ch = img.channels[c];
        Raster mag(img.width, img.height);
        if (order == 1) {
            const Raster gx = convolve_separable(ch, g1, g0);
            const Raster gy = convolve_separable(ch, g0, g1);
            for (size_t i = 0; i < mag.v.size(); ++i)
                mag.v[i] = std::sqrt(gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i]);
        } else {
            const Kernel1D g2 = gaussian_kernel(sigma, 2);
            const Raster gxx = convolve_separable(ch, g2, g0);
            const Raster gyy = convolve_separable(ch, g0, g2);
            const Raster gxy = convolve_separable(ch, g1, g1);
            for (size_t i = 0; i < mag.v.size(); ++i)
                mag.v[i] = std::sqrt(gxx.v[i] * gxx.v[i] + gxy.v[i] * gxy.v[i] +
                                     gyy.v[i] * gyy.v[i]);
        }
        m.channels[c] = std::move(mag);
    }
    m.valid = erode_frame(img.valid, img.width, img.height, kernel_radius(sigma));
    return m;
}

Raster dog_response(const Raster& channel, double sigma, double surround_ratio,
                    double k_surround) {
    if (!(sigma > 0.0)) throw ConfigError("difference-of-gaussians requires sigma > 0");
    if (!(surround_ratio > 1.0))
        throw ConfigError("difference-of-gaussians requires surround_ratio > 1");
    if (!(k_surround >= 0.0 && k_surround <= 1.0))
        throw ConfigError("surround weight must be in [0, 1]");

    const Kernel1D gc = gaussian_kernel(sigma, 0);
    Raster center = convolve_separable(channel, gc, gc);
    if (k_surround == 0.0) return center;

    const Kernel1D gs = gaussian_kernel(surround_ratio * sigma, 0);
    const Raster surround = convolve_separable(channel, gs, gs);
    for (size_t i = 0; i < center.v.size(); ++i) center.v[i] -= k_surround * surround.v[i];
    return center;
}

}  // namespace cvp
