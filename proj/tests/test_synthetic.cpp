#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>

#include "cvp/metrics.hpp"
#include "cvp/synthetic.hpp"
#include "doctest.h"

using namespace cvp;

TEST_CASE("same seed, same scene; different seed, different scene") {
    SyntheticSceneSpec spec;
    spec.noise_sigma = 0.05;
    spec.salt_fraction = 0.01;
    const SyntheticScene a = generate_synthetic(spec, 42);
    const SyntheticScene b = generate_synthetic(spec, 42);
    CHECK(a.illuminant.r == b.illuminant.r);
    CHECK(a.illuminant.g == b.illuminant.g);
    CHECK(a.illuminant.b == b.illuminant.b);
    for (int c = 0; c < 3; ++c)
        CHECK(a.image.channels[c].v == b.image.channels[c].v);

    const SyntheticScene other = generate_synthetic(spec, 43);
    CHECK(a.image.channels[0].v != other.image.channels[0].v);
}

TEST_CASE("scene geometry: flat axis-aligned patches") {
    SyntheticSceneSpec spec;  // 64x64, 4x4 patches -> 16x16 pixel patches
    const SyntheticScene s = generate_synthetic(spec, 7);
    CHECK(s.image.width == 64);
    CHECK(s.image.height == 64);
    // every pixel of a patch equals its top-left pixel
    for (int py = 0; py < 4; ++py)
        for (int px = 0; px < 4; ++px) {
            const double r0 = s.image.channels[0].at(px * 16, py * 16);
            for (int y = py * 16; y < (py + 1) * 16; ++y)
                for (int x = px * 16; x < (px + 1) * 16; ++x)
                    CHECK(s.image.channels[0].at(x, y) == r0);
        }
    // neighboring patches differ (almost surely for random reflectances)
    CHECK(s.image.channels[0].at(0, 0) != s.image.channels[0].at(16, 0));
}

TEST_CASE("patch index arithmetic handles non-divisible sizes") {
    SyntheticSceneSpec spec;
    spec.width = 10;
    spec.height = 7;
    spec.patch_rows = 3;
    spec.patch_cols = 4;
    const SyntheticScene s = generate_synthetic(spec, 3);
    // x in [0,10): patch column floor(x*4/10) -> breaks at x = 3, 5, 8
    CHECK(s.image.channels[0].at(0, 0) == s.image.channels[0].at(2, 0));
    CHECK(s.image.channels[0].at(3, 0) != s.image.channels[0].at(2, 0));
    // y in [0,7): patch row floor(y*3/7) -> breaks at y = 3, 5
    CHECK(s.image.channels[0].at(0, 0) == s.image.channels[0].at(0, 2));
    CHECK(s.image.channels[0].at(0, 3) != s.image.channels[0].at(0, 2));
}

TEST_CASE("white patch renders the illuminant itself") {
    SyntheticSceneSpec spec;  // noise and salt off
    const SyntheticScene s = generate_synthetic(spec, 19);
    double mx[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c)
        for (double v : s.image.channels[c].v) mx[c] = std::max(mx[c], v);
    CHECK(mx[0] == s.illuminant.r);
    CHECK(mx[1] == s.illuminant.g);
    CHECK(mx[2] == s.illuminant.b);
    CHECK(s.illuminant.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("without a white patch the maxima fall short of the illuminant") {
    SyntheticSceneSpec spec;
    spec.white_patch = false;
    const SyntheticScene s = generate_synthetic(spec, 19);
    for (int c = 0; c < 3; ++c) {
        double mx = 0.0;
        for (double v : s.image.channels[c].v) mx = std::max(mx, v);
        CHECK(mx <= 0.9 * s.illuminant[c] + 1e-15);
    }
}

TEST_CASE("noise keeps values inside the unit range") {
    SyntheticSceneSpec spec;
    spec.noise_sigma = 0.3;
    const SyntheticScene s = generate_synthetic(spec, 23);
    bool seen_nonflat = false;
    for (int c = 0; c < 3; ++c)
        for (double v : s.image.channels[c].v) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    const double a = s.image.channels[0].at(1, 1);
    const double b = s.image.channels[0].at(2, 1);
    seen_nonflat = a != b;  // same patch, so only noise separates them
    CHECK(seen_nonflat);
}

TEST_CASE("salt overwrites pixels with pure white at roughly the asked rate") {
    SyntheticSceneSpec spec;
    spec.salt_fraction = 0.25;
    const SyntheticScene s = generate_synthetic(spec, 29);
    long n_salt = 0;
    for (size_t i = 0; i < s.image.pixel_count(); ++i) {
        const bool white = s.image.channels[0].v[i] == 1.0 &&
                           s.image.channels[1].v[i] == 1.0 && s.image.channels[2].v[i] == 1.0;
        n_salt += white;
        CHECK(s.image.valid[i] == 1);
    }
    // 4096 Bernoulli(0.25) draws; +-6 sigma is about +-166
    CHECK(n_salt > 1024 - 170);
    CHECK(n_salt < 1024 + 170);
}

TEST_CASE("illuminant chromaticity respects the configured range") {
    SyntheticSceneSpec spec;
    spec.illuminant_min = 0.5;
    spec.illuminant_max = 1.0;
    for (uint64_t seed = 0; seed < 40; ++seed) {
        const SyntheticScene s = generate_synthetic(spec, seed);
        const double mx = std::max({s.illuminant.r, s.illuminant.g, s.illuminant.b});
        const double mn = std::min({s.illuminant.r, s.illuminant.g, s.illuminant.b});
        CHECK(mx / mn <= 2.0 + 1e-12);  // bounded by illuminant_max/illuminant_min
        CHECK(mn > 0.0);
    }
}

TEST_CASE("spec validation") {
    SyntheticSceneSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.width = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSceneSpec{};
    spec.patch_rows = 65;  // finer than the 64-pixel height
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSceneSpec{};
    spec.illuminant_min = 0.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSceneSpec{};
    spec.illuminant_min = 0.9;
    spec.illuminant_max = 0.3;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSceneSpec{};
    spec.noise_sigma = 1.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSceneSpec{};
    spec.salt_fraction = -0.1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("seed mixing yields distinct per-image seeds") {
    std::set<uint64_t> seen;
    for (uint64_t i = 0; i < 10000; ++i) seen.insert(mix_seed(0, i));
    CHECK(seen.size() == 10000);
    // different bases decorrelate even at equal indices
    CHECK(mix_seed(0, 5) != mix_seed(1, 5));
    // adjacent indices are scrambled, not sequential
    CHECK(mix_seed(7, 1) != mix_seed(7, 0) + 1);
}
