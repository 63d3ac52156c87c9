#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cvp/imgio.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cvp;

namespace {

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    REQUIRE(out.good());
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Minimal P6 writer for crafting fixtures (independent of save_image).
std::string ppm8(int w, int h, const std::vector<std::array<uint8_t, 3>>& px) {
    std::string s = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    for (const auto& p : px) {
        s.push_back(static_cast<char>(p[0]));
        s.push_back(static_cast<char>(p[1]));
        s.push_back(static_cast<char>(p[2]));
    }
    return s;
}

std::string ppm16(int w, int h, const std::vector<std::array<uint16_t, 3>>& px) {
    std::string s = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
    for (const auto& p : px)
        for (int c = 0; c < 3; ++c) {
            s.push_back(static_cast<char>(p[c] >> 8));
            s.push_back(static_cast<char>(p[c] & 0xff));
        }
    return s;
}

}  // namespace

TEST_CASE("8-bit PPM pixels normalize to [0,1]") {
    const std::string dir = testutil::temp_dir("imgio_norm");
    write_bytes(dir + "/px.ppm", ppm8(1, 1, {{{128, 64, 32}}}));
    const Image img = load_image(dir + "/px.ppm");
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    CHECK(img.channels[0].at(0, 0) == doctest::Approx(0.50196).epsilon(1e-6));
    CHECK(img.channels[1].at(0, 0) == doctest::Approx(0.25098).epsilon(1e-6));
    CHECK(img.channels[2].at(0, 0) == doctest::Approx(0.12549).epsilon(1e-6));
    CHECK(img.valid_at(0, 0));
    CHECK(img.bit_depth_origin == 8);
}

TEST_CASE("ASCII P3 decodes identically to binary P6") {
    const std::string dir = testutil::temp_dir("imgio_ascii");
    write_bytes(dir + "/a.ppm", "P3\n# comment\n2 1\n255\n10 20 30 200 150 100\n");
    write_bytes(dir + "/b.ppm", ppm8(2, 1, {{{10, 20, 30}}, {{200, 150, 100}}}));
    const Image a = load_image(dir + "/a.ppm");
    const Image b = load_image(dir + "/b.ppm");
    for (int c = 0; c < 3; ++c)
        for (int x = 0; x < 2; ++x) CHECK(a.channels[c].at(x, 0) == b.channels[c].at(x, 0));
}

TEST_CASE("fully saturated image is rejected") {
    const std::string dir = testutil::temp_dir("imgio_sat");
    write_bytes(dir + "/white.ppm", ppm8(2, 2, {{{255, 255, 255}},
                                                {{255, 255, 255}},
                                                {{255, 255, 255}},
                                                {{255, 255, 255}}}));
    CHECK_THROWS_WITH_AS(load_image(dir + "/white.ppm"),
                         doctest::Contains("all pixels invalid"), DataError);
}

TEST_CASE("saturation flags any channel over threshold but keeps values") {
    const std::string dir = testutil::temp_dir("imgio_flag");
    write_bytes(dir + "/px.ppm", ppm8(2, 1, {{{255, 0, 0}}, {{100, 100, 100}}}));
    const Image img = load_image(dir + "/px.ppm");
    CHECK_FALSE(img.valid_at(0, 0));
    CHECK(img.valid_at(1, 0));
    CHECK(img.channels[0].at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("16-bit black level subtraction") {
    const std::string dir = testutil::temp_dir("imgio_black");
    write_bytes(dir + "/px.ppm", ppm16(2, 1, {{{129, 129, 129}}, {{1000, 5000, 40000}}}));
    PreprocessSpec spec;
    spec.black_level = 129.0;
    const Image img = load_image(dir + "/px.ppm", spec);
    CHECK(img.bit_depth_origin == 16);
    for (int c = 0; c < 3; ++c) CHECK(img.channels[c].at(0, 0) == 0.0);
    const double denom = 65535.0 - 129.0;
    CHECK(img.channels[0].at(1, 0) == doctest::Approx((1000.0 - 129.0) / denom).epsilon(1e-12));
    CHECK(img.channels[1].at(1, 0) == doctest::Approx((5000.0 - 129.0) / denom).epsilon(1e-12));
    CHECK(img.channels[2].at(1, 0) == doctest::Approx((40000.0 - 129.0) / denom).epsilon(1e-12));
}

TEST_CASE("black level beyond the raw range is rejected") {
    const std::string dir = testutil::temp_dir("imgio_black_bad");
    write_bytes(dir + "/px.ppm", ppm8(1, 1, {{{1, 2, 3}}}));
    PreprocessSpec spec;
    spec.black_level = 255.0;
    CHECK_THROWS_AS(load_image(dir + "/px.ppm", spec), DataError);
}

TEST_CASE("save quantizes with round-half-up and clamps over-range values") {
    const std::string dir = testutil::temp_dir("imgio_quant");
    Image img = testutil::make_image(1, 3);
    img.channels[0].at(0, 0) = 1.0;
    img.channels[1].at(0, 0) = 1.0;
    img.channels[2].at(0, 0) = 1.0;
    img.channels[0].at(0, 1) = 0.5;
    img.channels[1].at(0, 1) = 0.5;
    img.channels[2].at(0, 1) = 0.5;
    img.channels[0].at(0, 2) = 1.3;  // over-range after a correction
    img.channels[1].at(0, 2) = -0.2;
    img.channels[2].at(0, 2) = 0.0;
    save_image(img, std::nullopt, dir + "/q.ppm");
    const std::string bytes = read_bytes(dir + "/q.ppm");
    REQUIRE(bytes.size() >= 9);
    const std::string data = bytes.substr(bytes.size() - 9);
    CHECK(static_cast<uint8_t>(data[0]) == 255);
    CHECK(static_cast<uint8_t>(data[3]) == 128);  // 127.5 rounds up
    CHECK(static_cast<uint8_t>(data[6]) == 255);
    CHECK(static_cast<uint8_t>(data[7]) == 0);
    CHECK(static_cast<uint8_t>(data[8]) == 0);
}

TEST_CASE("8-bit round trip is within one quantization step and then exact") {
    const std::string dir = testutil::temp_dir("imgio_roundtrip");
    testutil::Rng rng(7);
    Image img = testutil::make_image(9, 5);
    for (auto& ch : img.channels)
        for (double& v : ch.v) v = rng.uni(0.0, 0.95);

    save_image(img, std::nullopt, dir + "/rt.ppm");
    PreprocessSpec relaxed;
    relaxed.saturation_threshold = 1.0;
    const Image back = load_image(dir + "/rt.ppm", relaxed);
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < img.pixel_count(); ++i)
            CHECK(std::abs(back.channels[c].v[i] - img.channels[c].v[i]) <= 1.0 / 255.0);

    // Quantized data survives a second round trip bit-exactly.
    save_image(back, std::nullopt, dir + "/rt2.ppm");
    const Image back2 = load_image(dir + "/rt2.ppm", relaxed);
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < img.pixel_count(); ++i)
            CHECK(back2.channels[c].v[i] == back.channels[c].v[i]);
}

TEST_CASE("PNG round trip") {
    const std::string dir = testutil::temp_dir("imgio_png");
    testutil::Rng rng(11);
    Image img = testutil::make_image(6, 4);
    for (auto& ch : img.channels)
        for (double& v : ch.v) v = rng.uni(0.0, 0.9);
    save_image(img, Illuminant{0.5, 0.6, 0.7}, dir + "/rt.png");
    const Image back = load_image(dir + "/rt.png");
    CHECK(back.width == 6);
    CHECK(back.height == 4);
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < img.pixel_count(); ++i)
            CHECK(std::abs(back.channels[c].v[i] - img.channels[c].v[i]) <= 1.0 / 255.0);
}

TEST_CASE("grayscale mask excludes nonzero pixels") {
    const std::string dir = testutil::temp_dir("imgio_mask");
    write_bytes(dir + "/img.ppm", ppm8(2, 1, {{{10, 10, 10}}, {{20, 20, 20}}}));
    write_bytes(dir + "/mask.pgm", std::string("P5\n2 1\n255\n") + '\x01' + '\x00');
    PreprocessSpec spec;
    spec.mask_path = dir + "/mask.pgm";
    const Image img = load_image(dir + "/img.ppm", spec);
    CHECK_FALSE(img.valid_at(0, 0));
    CHECK(img.valid_at(1, 0));

    write_bytes(dir + "/bad.pgm", std::string("P5\n1 1\n255\n") + '\x00');
    PreprocessSpec bad;
    bad.mask_path = dir + "/bad.pgm";
    CHECK_THROWS_WITH_AS(load_image(dir + "/img.ppm", bad), doctest::Contains("dimensions"),
                         DataError);
}

TEST_CASE("validity is monotone in the saturation threshold and mask") {
    const std::string dir = testutil::temp_dir("imgio_monotone");
    testutil::Rng rng(3);
    std::vector<std::array<uint8_t, 3>> px(24);
    for (auto& p : px)
        for (auto& ch : p) ch = static_cast<uint8_t>(rng.integer(0, 255));
    write_bytes(dir + "/img.ppm", ppm8(6, 4, px));

    PreprocessSpec strict;
    strict.saturation_threshold = 0.6;
    const Image loose_img = load_image(dir + "/img.ppm");  // default 0.98
    const Image strict_img = load_image(dir + "/img.ppm", strict);
    for (size_t i = 0; i < loose_img.pixel_count(); ++i)
        if (!loose_img.valid[i]) CHECK_FALSE(strict_img.valid[i]);
}

TEST_CASE("gamma decoding applies last") {
    const std::string dir = testutil::temp_dir("imgio_gamma");
    write_bytes(dir + "/px.ppm", ppm8(1, 1, {{{128, 128, 128}}}));
    PreprocessSpec spec;
    spec.gamma_decode = 2.2;
    const Image img = load_image(dir + "/px.ppm", spec);
    CHECK(img.channels[0].at(0, 0) ==
          doctest::Approx(std::pow(128.0 / 255.0, 2.2)).epsilon(1e-12));
}

TEST_CASE("unreadable and malformed inputs raise data errors") {
    const std::string dir = testutil::temp_dir("imgio_bad");
    CHECK_THROWS_AS(load_image(dir + "/missing.ppm"), DataError);
    write_bytes(dir + "/junk.bin", "this is not an image");
    CHECK_THROWS_WITH_AS(load_image(dir + "/junk.bin"), doctest::Contains("unsupported"),
                         DataError);
    write_bytes(dir + "/trunc.ppm", "P6\n4 4\n255\nxx");
    CHECK_THROWS_AS(load_image(dir + "/trunc.ppm"), DataError);

    const Image img = testutil::make_image(1, 1, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(save_image(img, std::nullopt, dir + "/out.tiff"), ConfigError);
}

TEST_CASE("manifest entries validate and normalize") {
    const std::string dir = testutil::temp_dir("imgio_manifest");
    write_bytes(dir + "/m.json", R"([
      {"image": "a.ppm", "illuminant": [2, 2, 2]},
      {"image": "/abs/b.ppm", "illuminant": [1, 0.5, 0.25],
       "black_level": 10, "saturation": 0.9, "mask": "mk.pgm"}
    ])");
    const auto entries = load_manifest(dir + "/m.json");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].image_path == dir + "/a.ppm");
    CHECK(entries[0].ground_truth.r == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(entries[0].ground_truth.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(entries[1].image_path == "/abs/b.ppm");  // absolute paths pass through
    CHECK(entries[1].preprocess.black_level == 10.0);
    CHECK(entries[1].preprocess.saturation_threshold == 0.9);
    REQUIRE(entries[1].preprocess.mask_path.has_value());
    CHECK(*entries[1].preprocess.mask_path == dir + "/mk.pgm");
    CHECK(entries[1].ground_truth.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("manifest rejections") {
    const std::string dir = testutil::temp_dir("imgio_manifest_bad");
    const auto write_and_load = [&](const char* name, const std::string& text) {
        write_bytes(dir + "/" + name, text);
        return dir + "/" + name;
    };

    CHECK(load_manifest(write_and_load("empty.json", "[]")).empty());
    CHECK_THROWS_WITH_AS(
        load_manifest(write_and_load("noimg.json", R"([{"illuminant": [1,1,1]}])")),
        doctest::Contains("image"), DataError);
    CHECK_THROWS_WITH_AS(
        load_manifest(write_and_load("unknown.json",
                                     R"([{"image": "a.ppm", "illuminant": [1,1,1], "x": 1}])")),
        doctest::Contains("unknown key"), DataError);
    CHECK_THROWS_WITH_AS(
        load_manifest(write_and_load("negill.json",
                                     R"([{"image": "a.ppm", "illuminant": [1, -1, 1]}])")),
        doctest::Contains("positive"), DataError);
    CHECK_THROWS_WITH_AS(load_manifest(write_and_load("syntax.json", "[{\n  broken")),
                         doctest::Contains("line"), DataError);
    CHECK_THROWS_AS(load_manifest(write_and_load("notarray.json", "{}")), DataError);
}
