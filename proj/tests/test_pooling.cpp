#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "cvp/pooling.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cvp;

TEST_CASE("max pooling respects the validity mask") {
    FeatureMap fm = testutil::make_map(3, 1, 0.0);
    fm.channels[0].v = {0.2, 0.9, 0.4};
    fm.channels[1].v = {0.5, 0.1, 0.3};
    fm.channels[2].v = {0.0, 0.0, 0.0};
    const PoolResult all = pool_max(fm);
    CHECK(all.value[0] == 0.9);
    CHECK(all.value[1] == 0.5);
    CHECK(all.value[2] == 0.0);
    CHECK_FALSE(all.has_selection);

    fm.valid = {1, 0, 1};  // knock out the global max of channel 0
    const PoolResult masked = pool_max(fm);
    CHECK(masked.value[0] == 0.4);
    CHECK(masked.value[1] == 0.5);

    fm.valid = {0, 0, 0};
    CHECK_THROWS_AS(pool_max(fm), DataError);
}

TEST_CASE("power mean worked examples") {
    FeatureMap two = testutil::make_map(2, 1, 0.0);
    for (auto& ch : two.channels) ch.v = {0.6, 0.8};
    CHECK(pool_minkowski(two, 2.0).value[0] ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

    for (auto& ch : two.channels) ch.v = {0.2, 0.4};
    CHECK(pool_minkowski(two, 1.0).value[0] == doctest::Approx(0.3).epsilon(1e-12));

    FeatureMap three = testutil::make_map(3, 1, 0.0);
    for (auto& ch : three.channels) ch.v = {0.2, 0.4, 0.8};
    const double v = pool_minkowski(three, 256.0).value[0];
    CHECK(std::abs(v - 0.8) / 0.8 < 0.01);
}

TEST_CASE("power mean matches a direct evaluation for moderate p") {
    testutil::Rng rng(5);
    const FeatureMap fm = testutil::random_map(rng, 12, 9, 0.05, 1.0);
    for (double p : {1.0, 1.5, 2.0, 4.0, 7.0}) {
        CAPTURE(p);
        const PoolResult r = pool_minkowski(fm, p);
        for (int c = 0; c < 3; ++c) {
            std::vector<double> vals;
            for (size_t i = 0; i < fm.pixel_count(); ++i)
                if (fm.valid[i]) vals.push_back(fm.channels[c].v[i]);
            CHECK(r.value[c] == doctest::Approx(oracle::minkowski(vals, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("power mean is monotone in p and sits between mean and max") {
    testutil::Rng rng(6);
    const FeatureMap fm = testutil::random_map(rng, 20, 20, 0.0, 1.0);
    const PoolResult mx = pool_max(fm);
    double prev[3] = {-1.0, -1.0, -1.0};
    for (double p : {1.0, 2.0, 4.0, 16.0, 64.0}) {
        const PoolResult r = pool_minkowski(fm, p);
        for (int c = 0; c < 3; ++c) {
            CHECK(r.value[c] >= prev[c] - 1e-12);
            CHECK(r.value[c] <= mx.value[c] + 1e-12);
            prev[c] = r.value[c];
        }
    }
}

TEST_CASE("huge exponents survive without underflow") {
    testutil::Rng rng(8);
    const FeatureMap fm = testutil::random_map(rng, 64, 64, 0.1, 1.0);
    const PoolResult r = pool_minkowski(fm, 2048.0);
    const PoolResult mx = pool_max(fm);
    for (int c = 0; c < 3; ++c) {
        CHECK(std::isfinite(r.value[c]));
        CHECK(std::abs(r.value[c] - mx.value[c]) / mx.value[c] < 0.005);
    }
}

TEST_CASE("p=1 equals the full-percentage selection") {
    testutil::Rng rng(9);
    const FeatureMap fm = testutil::random_map(rng, 33, 17, 0.0, 1.0);
    const PoolResult mean = pool_minkowski(fm, 1.0);
    const PoolResult top = pool_top_x(fm, 100.0);
    for (int c = 0; c < 3; ++c)
        CHECK(std::abs(mean.value[c] - top.value[c]) < 1e-12);
}

TEST_CASE("power mean parameter validation") {
    const FeatureMap fm = testutil::make_map(2, 2, 0.5);
    CHECK_THROWS_AS(pool_minkowski(fm, 0.5), ConfigError);
    CHECK_THROWS_AS(pool_minkowski(fm, 0.0), ConfigError);
    CHECK_THROWS_AS(pool_minkowski(fm, std::numeric_limits<double>::infinity()), ConfigError);
}

TEST_CASE("selection pooling worked example: top 20% of ten pixels") {
    FeatureMap fm = testutil::make_map(10, 1, 0.0);
    for (auto& ch : fm.channels)
        ch.v = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    const PoolResult r = pool_top_x(fm, 20.0);
    CHECK(r.has_selection);
    for (int c = 0; c < 3; ++c) {
        CHECK(r.value[c] == doctest::Approx(0.95).epsilon(1e-12));
        CHECK(r.pooled_count[c] == 2);
        CHECK(r.threshold[c] == 0.9);
        CHECK(r.x_percent[c] == 20.0);
    }
}

TEST_CASE("tiny percentages clamp to a single pixel and equal max exactly") {
    testutil::Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        FeatureMap fm = testutil::random_map(rng, 15, 11, 0.0, 1.0);
        if (trial % 2) {
            // duplicate the maximum somewhere else to exercise ties at the top
            fm.channels[0].v[3] = *std::max_element(fm.channels[0].v.begin(),
                                                    fm.channels[0].v.end());
        }
        const PoolResult top = pool_top_x(fm, 0.01);
        const PoolResult mx = pool_max(fm);
        for (int c = 0; c < 3; ++c) {
            CHECK(top.value[c] == mx.value[c]);  // bitwise: the mean shortcut
            CHECK(top.threshold[c] == mx.value[c]);
        }
    }
}

TEST_CASE("ties at the selection threshold are all pooled") {
    FeatureMap fm = testutil::make_map(8, 1, 0.0);
    for (auto& ch : fm.channels) ch.v = {0.9, 0.5, 0.5, 0.5, 0.2, 0.1, 0.1, 0.0};
    // 25% of 8 -> N = 2; the 2nd largest (0.5) is tied with two more.
    const PoolResult r = pool_top_x(fm, 25.0);
    for (int c = 0; c < 3; ++c) {
        CHECK(r.pooled_count[c] == 4);
        CHECK(r.threshold[c] == 0.5);
        CHECK(r.value[c] == doctest::Approx((0.9 + 3 * 0.5) / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("an all-equal channel pools to that value exactly") {
    const FeatureMap fm = testutil::make_map(7, 7, 0.3);
    for (double x : {0.1, 33.0, 100.0}) {
        const PoolResult r = pool_top_x(fm, x);
        CHECK(r.value[0] == 0.3);
        CHECK(r.threshold[0] == 0.3);
    }
}

TEST_CASE("selection pooling matches the reference formulation") {
    testutil::Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        FeatureMap fm = testutil::random_map(rng, 16, 16, 0.0, 1.0);
        // quantize one channel to force duplicates
        for (double& v : fm.channels[1].v) v = std::round(v * 20.0) / 20.0;
        const double x = rng.uni(0.05, 100.0);
        const PoolResult r = pool_top_x(fm, x);
        for (int c = 0; c < 3; ++c) {
            std::vector<double> vals;
            for (size_t i = 0; i < fm.pixel_count(); ++i)
                if (fm.valid[i]) vals.push_back(fm.channels[c].v[i]);
            const oracle::TopXResult want = oracle::top_x(vals, x);
            CHECK(r.pooled_count[c] == want.count);
            CHECK(r.threshold[c] == want.threshold);
            CHECK(std::abs(r.value[c] - want.mean) < 1e-12);
        }
    }
}

TEST_CASE("per-channel percentages are applied independently") {
    FeatureMap fm = testutil::make_map(10, 1, 0.0);
    for (auto& ch : fm.channels)
        ch.v = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    const PoolResult r = pool_top_x(fm, std::array<double, 3>{10.0, 50.0, 100.0});
    CHECK(r.value[0] == 1.0);
    CHECK(r.value[1] == doctest::Approx(0.8).epsilon(1e-12));  // mean of top 5
    CHECK(r.value[2] == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(r.pooled_count[0] == 1);
    CHECK(r.pooled_count[1] == 5);
    CHECK(r.pooled_count[2] == 10);
}

TEST_CASE("binned selection pools whole histogram bins") {
    testutil::Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const FeatureMap fm = testutil::random_map(rng, 32, 32, 0.0, 1.0);
        const double x = rng.uni(0.5, 60.0);
        const PoolResult exact = pool_top_x(fm, x, false);
        const PoolResult binned = pool_top_x(fm, x, true);
        for (int c = 0; c < 3; ++c) {
            // The binned set is "top pooled_count values" for some count >= the
            // exact target, so its mean can only drop.
            const long target = std::clamp<long>(
                std::lround(x / 100.0 * static_cast<double>(fm.pixel_count())), 1,
                static_cast<long>(fm.pixel_count()));
            CHECK(binned.pooled_count[c] >= target);
            CHECK(binned.value[c] <= exact.value[c] + 1e-12);

            std::vector<double> vals;
            for (size_t i = 0; i < fm.pixel_count(); ++i)
                if (fm.valid[i]) vals.push_back(fm.channels[c].v[i]);
            std::sort(vals.begin(), vals.end(), std::greater<>());
            double sum = 0.0;
            for (long i = 0; i < binned.pooled_count[c]; ++i) sum += vals[i];
            CHECK(binned.value[c] ==
                  doctest::Approx(sum / binned.pooled_count[c]).epsilon(1e-9));
            CHECK(binned.threshold[c] ==
                  doctest::Approx(vals[binned.pooled_count[c] - 1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("binned selection of an all-zero channel") {
    const FeatureMap fm = testutil::make_map(5, 5, 0.0);
    const PoolResult r = pool_top_x(fm, 10.0, true);
    CHECK(r.value[0] == 0.0);
    CHECK(r.pooled_count[0] == 25);
}

TEST_CASE("selection percentage validation") {
    const FeatureMap fm = testutil::make_map(4, 4, 0.5);
    CHECK_THROWS_AS(pool_top_x(fm, 0.0), ConfigError);
    CHECK_THROWS_AS(pool_top_x(fm, -5.0), ConfigError);
    CHECK_THROWS_AS(pool_top_x(fm, 100.5), ConfigError);
    CHECK_THROWS_AS(pool_top_x(fm, 0.0, true), ConfigError);
    CHECK_THROWS_AS(pool_top_x(fm, std::array<double, 3>{50.0, 0.0, 50.0}), ConfigError);
}

TEST_CASE("adaptive pooling composes contrast, percentage and selection") {
    testutil::Rng rng(14);
    FeatureMap fm = testutil::random_map(rng, 24, 24, 0.0, 1.0);
    const CvpConfig cfg;
    const PoolResult got = pool_cvp(fm, cfg);
    const ContrastMap cmap = local_contrast(fm, cfg.sigma);
    const std::array<double, 3> x = cvp_percentage(cmap, cfg);
    const PoolResult want = pool_top_x(fm, x);
    for (int c = 0; c < 3; ++c) {
        CHECK(got.value[c] == want.value[c]);
        CHECK(got.x_percent[c] == x[c]);
        CHECK(got.pooled_count[c] == want.pooled_count[c]);
    }
    CHECK(got.has_selection);
}

TEST_CASE("adaptive pooling of a constant map averages everything") {
    const FeatureMap fm = testutil::make_map(20, 20, 0.42);
    const PoolResult r = pool_cvp(fm, CvpConfig{});
    CHECK(r.value[0] == 0.42);
    CHECK(r.x_percent[0] == 100.0);
    CHECK(r.pooled_count[0] == 400);
}

TEST_CASE("spec factories, dispatch and labels") {
    testutil::Rng rng(15);
    const FeatureMap fm = testutil::random_map(rng, 10, 10, 0.0, 1.0);

    CHECK(pool(fm, PoolingSpec::make_max()).value[0] == pool_max(fm).value[0]);
    CHECK(pool(fm, PoolingSpec::make_minkowski(3.0)).value[1] ==
          pool_minkowski(fm, 3.0).value[1]);
    CHECK(pool(fm, PoolingSpec::make_top_x(7.0)).value[2] == pool_top_x(fm, 7.0).value[2]);
    CHECK(pool(fm, PoolingSpec::make_cvp()).value[0] == pool_cvp(fm, CvpConfig{}).value[0]);

    CHECK(PoolingSpec::make_max().label() == "max");
    CHECK(PoolingSpec::make_minkowski(4.0).label() == "minkowski(4)");
    CHECK(PoolingSpec::make_top_x(0.5).label() == "top_x(0.5)");
    CHECK(PoolingSpec::make_top_x(12.5, true).label() == "top_x_binned(12.5)");
    CHECK(PoolingSpec::make_cvp().label() == "cvp");

    CHECK_THROWS_AS(PoolingSpec::make_minkowski(0.9), ConfigError);
    CHECK_THROWS_AS(PoolingSpec::make_top_x(0.0), ConfigError);
    CHECK_THROWS_AS(PoolingSpec::make_top_x(101.0), ConfigError);
}
