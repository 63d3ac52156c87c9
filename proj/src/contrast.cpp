#include "cvp/contrast.hpp"

#include <algorithm>
#include <cmath>

namespace cvp {

void CvpConfig::validate() const {
    if (sigma < 1) throw ConfigError("contrast window sigma must be >= 1");
    if (!(c_min > 0.0 && c_min <= 0.5)) throw ConfigError("c_min must be in (0, 0.5]");
    if (!(x_min > 0.0 && x_min <= x_max && x_max <= 100.0))
        throw ConfigError("percentage clamps require 0 < x_min <= x_max <= 100");
}

namespace {

ContrastMap contrast_impl(const std::array<Raster, 3>& channels,
                          const std::vector<uint8_t>& valid, int w, int h, int sigma) {
    if (sigma < 1) throw ConfigError("local contrast requires sigma >= 1");
    ContrastMap cm;
    cm.width = w;
    cm.height = h;
    cm.valid.assign(static_cast<size_t>(w) * h, 0);
    for (auto& ch : cm.channels) ch = Raster(w, h);

    for (int c = 0; c < 3; ++c) {
        const Raster& src = channels[c];
        Raster& dst = cm.channels[c];
        for (int y = 0; y < h; ++y) {
            const int y0 = std::max(0, y - sigma), y1 = std::min(h - 1, y + sigma);
            for (int x = 0; x < w; ++x) {
                const size_t pi = static_cast<size_t>(y) * w + x;
                if (valid[pi] == 0) continue;
                const int x0 = std::max(0, x - sigma), x1 = std::min(w - 1, x + sigma);

                double sum = 0.0, lo = 0.0, hi = 0.0;
                long m = 0;
                for (int wy = y0; wy <= y1; ++wy)
                    for (int wx = x0; wx <= x1; ++wx) {
                        const size_t wi = static_cast<size_t>(wy) * w + wx;
                        if (valid[wi] == 0) continue;
                        const double v = src.v[wi];
                        if (m == 0) {
                            lo = hi = v;
                        } else {
                            lo = std::min(lo, v);
                            hi = std::max(hi, v);
                        }
                        sum += v;
                        ++m;
                    }
                if (m < 2) continue;  // too few samples for a deviation
                if (c == 0) cm.valid[pi] = 1;

                if (lo == hi) {
                    dst.at(x, y) = 0.0;  // constant neighborhood, exactly zero
                    continue;
                }
                const double mu = sum / m;
                double acc = 0.0;
                for (int wy = y0; wy <= y1; ++wy)
                    for (int wx = x0; wx <= x1; ++wx) {
                        const size_t wi = static_cast<size_t>(wy) * w + wx;
                        if (valid[wi] == 0) continue;
                        const double d = src.v[wi] - mu;
                        acc += d * d;
                    }
                dst.at(x, y) = std::min(0.5, std::sqrt(acc / m));
            }
        }
    }
    return cm;
}

}  // namespace

ContrastMap local_contrast(const FeatureMap& map, int sigma) {
    return contrast_impl(map.channels, map.valid, map.width, map.height, sigma);
}

ContrastMap local_contrast(const Image& img, int sigma) {
    return contrast_impl(img.channels, img.valid, img.width, img.height, sigma);
}

std::array<double, 3> cvp_percentage(const ContrastMap& cmap, const CvpConfig& cfg) {
    cfg.validate();
    std::array<double, 3> x{};
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        long n = 0;
        const Raster& ch = cmap.channels[c];
        for (size_t i = 0; i < ch.v.size(); ++i) {
            if (cmap.valid[i] == 0) continue;
            sum += 1.0 / std::max(ch.v[i], cfg.c_min);
            ++n;
        }
        if (n == 0) throw DataError("no valid contrast samples in channel");
        x[c] = std::clamp(sum / n, cfg.x_min, cfg.x_max);
    }
    return x;
}

}  // namespace cvp
