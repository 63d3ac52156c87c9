#include "cvp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cvp {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// All randomness flows through this wrapper so the draw sequence is pinned:
// the engine is the standard-specified mt19937_64 stream and every
// distribution is derived with fixed arithmetic (no library-defined
// distribution objects, whose sequences vary between implementations).
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(uint64_t seed) : gen(seed) {}

    double uniform() {  // [0, 1), 53-bit resolution
        return static_cast<double>(gen() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {  // Box-Muller, cosine branch only, two draws per call
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(kTwoPi * u2);
    }

    long below(long n) {  // integer in [0, n)
        const long v = static_cast<long>(uniform() * static_cast<double>(n));
        return std::min(v, n - 1);
    }
};

}  // namespace

void SyntheticSceneSpec::validate() const {
    if (width < 1 || height < 1) throw ConfigError("scene dimensions must be >= 1");
    if (patch_rows < 1 || patch_rows > height || patch_cols < 1 || patch_cols > width)
        throw ConfigError("patch grid must be >= 1x1 and no finer than the pixel grid");
    if (!(illuminant_min > 0.0 && illuminant_min <= illuminant_max))
        throw ConfigError("illuminant range requires 0 < illuminant_min <= illuminant_max");
    if (!(noise_sigma >= 0.0 && noise_sigma < 1.0))
        throw ConfigError("noise_sigma must be in [0, 1)");
    if (!(salt_fraction >= 0.0 && salt_fraction < 1.0))
        throw ConfigError("salt_fraction must be in [0, 1)");
}

SyntheticScene generate_synthetic(const SyntheticSceneSpec& spec, uint64_t seed) {
    spec.validate();
    Rng rng(seed);

    // Draw order is part of the determinism contract (see header).
    Illuminant e;
    for (int c = 0; c < 3; ++c) e[c] = rng.uniform(spec.illuminant_min, spec.illuminant_max);
    e = e.normalized();

    const long patches = static_cast<long>(spec.patch_rows) * spec.patch_cols;
    std::vector<std::array<double, 3>> refl(patches);
    for (auto& p : refl)
        for (int c = 0; c < 3; ++c) p[c] = rng.uniform(0.05, 0.9);
    if (spec.white_patch) {
        const long wp = rng.below(patches);
        refl[wp] = {1.0, 1.0, 1.0};
    }

    SyntheticScene scene;
    scene.illuminant = e;
    Image& img = scene.image;
    img.width = spec.width;
    img.height = spec.height;
    for (auto& ch : img.channels) ch = Raster(spec.width, spec.height);
    img.valid.assign(img.pixel_count(), 1);

    for (int y = 0; y < spec.height; ++y) {
        const int pr = static_cast<int>(static_cast<long>(y) * spec.patch_rows / spec.height);
        for (int x = 0; x < spec.width; ++x) {
            const int pc = static_cast<int>(static_cast<long>(x) * spec.patch_cols / spec.width);
            const auto& p = refl[static_cast<size_t>(pr) * spec.patch_cols + pc];
            for (int c = 0; c < 3; ++c) img.channels[c].at(x, y) = p[c] * e[c];
        }
    }

    if (spec.noise_sigma > 0.0) {
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x)
                for (int c = 0; c < 3; ++c) {
                    double& v = img.channels[c].at(x, y);
                    v = std::clamp(v + spec.noise_sigma * rng.normal(), 0.0, 1.0);
                }
    }

    if (spec.salt_fraction > 0.0) {
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x)
                if (rng.uniform() < spec.salt_fraction)
                    for (int c = 0; c < 3; ++c) img.channels[c].at(x, y) = 1.0;
    }

    return scene;
}

uint64_t mix_seed(uint64_t base, uint64_t index) { return splitmix64(splitmix64(base) + index); }

}  // namespace cvp
