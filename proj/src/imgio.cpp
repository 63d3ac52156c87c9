#include "cvp/imgio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "jsonio.hpp"

namespace cvp {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) { return detail::slurp_file<DataError>(path); }

// Raw interleaved samples straight out of the decoder, before preprocessing.
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 or 3
    int maxval = 255;
    std::vector<uint16_t> samples;  // width*height*channels
};

bool is_png(const std::string& buf) {
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    return buf.size() >= 8 && std::memcmp(buf.data(), sig, 8) == 0;
}

// ---- PNM -------------------------------------------------------------------

struct PnmCursor {
    const std::string& buf;
    size_t pos = 0;
};

// Skips whitespace and '#' comments; returns the next decimal integer.
long pnm_next_int(PnmCursor& c, const std::string& path) {
    for (;;) {
        while (c.pos < c.buf.size() && std::isspace(static_cast<unsigned char>(c.buf[c.pos])))
            ++c.pos;
        if (c.pos < c.buf.size() && c.buf[c.pos] == '#') {
            while (c.pos < c.buf.size() && c.buf[c.pos] != '\n') ++c.pos;
            continue;
        }
        break;
    }
    if (c.pos >= c.buf.size() || !std::isdigit(static_cast<unsigned char>(c.buf[c.pos])))
        throw DataError(path + ": malformed PNM header");
    long value = 0;
    while (c.pos < c.buf.size() && std::isdigit(static_cast<unsigned char>(c.buf[c.pos]))) {
        value = value * 10 + (c.buf[c.pos] - '0');
        if (value > 1'000'000'000L) throw DataError(path + ": PNM header value out of range");
        ++c.pos;
    }
    return value;
}

RawImage decode_pnm(const std::string& buf, const std::string& path) {
    const char kind = buf[1];
    const bool ascii = kind == '2' || kind == '3';
    RawImage raw;
    raw.channels = (kind == '3' || kind == '6') ? 3 : 1;

    PnmCursor c{buf, 2};
    raw.width = static_cast<int>(pnm_next_int(c, path));
    raw.height = static_cast<int>(pnm_next_int(c, path));
    raw.maxval = static_cast<int>(pnm_next_int(c, path));
    if (raw.width < 1 || raw.height < 1) throw DataError(path + ": invalid PNM dimensions");
    if (raw.maxval < 1 || raw.maxval > 65535) throw DataError(path + ": invalid PNM maxval");

    const size_t count = static_cast<size_t>(raw.width) * raw.height * raw.channels;
    raw.samples.resize(count);

    if (ascii) {
        for (size_t i = 0; i < count; ++i) {
            const long v = pnm_next_int(c, path);
            if (v > raw.maxval) throw DataError(path + ": PNM sample exceeds maxval");
            raw.samples[i] = static_cast<uint16_t>(v);
        }
    } else {
        // Exactly one whitespace byte separates the header from binary data.
        if (c.pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[c.pos])))
            throw DataError(path + ": malformed PNM header");
        ++c.pos;
        const int bytes_per_sample = raw.maxval > 255 ? 2 : 1;
        if (buf.size() - c.pos < count * bytes_per_sample)
            throw DataError(path + ": truncated PNM data");
        const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data() + c.pos);
        if (bytes_per_sample == 1) {
            for (size_t i = 0; i < count; ++i) raw.samples[i] = p[i];
        } else {
            for (size_t i = 0; i < count; ++i)  // big-endian per the PNM spec
                raw.samples[i] = static_cast<uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
        }
    }
    return raw;
}

// ---- PNG -------------------------------------------------------------------

struct PngReadState {
    const unsigned char* data;
    size_t size;
    size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + n > st->size) png_error(png, "read past end of buffer");
    std::memcpy(out, st->data + st->pos, n);
    st->pos += n;
}

RawImage decode_png(const std::string& buf, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError(path + ": libpng init failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError(path + ": libpng init failure");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError(path + ": PNG decode error");
    }

    PngReadState st{reinterpret_cast<const unsigned char*>(buf.data()), buf.size(), 0};
    png_set_read_fn(png, &st, png_mem_read);
    png_read_info(png, info);

    const png_byte color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_set_strip_alpha(png);  // also covers tRNS-expanded alpha
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    RawImage raw;
    raw.width = static_cast<int>(png_get_image_width(png, info));
    raw.height = static_cast<int>(png_get_image_height(png, info));
    raw.channels = 3;
    const int depth = png_get_bit_depth(png, info);
    raw.maxval = depth == 16 ? 65535 : 255;
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError(path + ": unsupported PNG channel layout");
    }

    const size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * raw.height);
    row_ptrs.resize(raw.height);
    for (int y = 0; y < raw.height; ++y) row_ptrs[y] = pixels.data() + rowbytes * y;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const size_t count = static_cast<size_t>(raw.width) * raw.height * 3;
    raw.samples.resize(count);
    if (depth == 16) {
        for (size_t i = 0; i < count; ++i)  // network byte order
            raw.samples[i] = static_cast<uint16_t>((pixels[2 * i] << 8) | pixels[2 * i + 1]);
    } else {
        for (size_t i = 0; i < count; ++i) raw.samples[i] = pixels[i];
    }
    return raw;
}

RawImage decode_any(const std::string& path) {
    const std::string buf = read_file(path);
    if (is_png(buf)) return decode_png(buf, path);
    if (buf.size() >= 2 && buf[0] == 'P' &&
        (buf[1] == '2' || buf[1] == '3' || buf[1] == '5' || buf[1] == '6'))
        return decode_pnm(buf, path);
    throw DataError(path + ": unsupported image format");
}

void validate_spec(const PreprocessSpec& spec) {
    if (!(spec.saturation_threshold > 0.0 && spec.saturation_threshold <= 1.0))
        throw ConfigError("saturation threshold must be in (0, 1]");
    if (spec.black_level < 0.0) throw ConfigError("black level must be >= 0");
    if (spec.gamma_decode && !(*spec.gamma_decode > 0.0))
        throw ConfigError("gamma decode exponent must be > 0");
}

}  // namespace

Image load_image(const std::string& path, const PreprocessSpec& spec) {
    validate_spec(spec);
    const RawImage raw = decode_any(path);
    const double max_raw = raw.maxval;
    if (spec.black_level >= max_raw)
        throw DataError(path + ": black level exceeds the raw value range");

    Image img;
    img.width = raw.width;
    img.height = raw.height;
    img.bit_depth_origin = raw.maxval > 255 ? 16 : 8;
    for (auto& ch : img.channels) ch = Raster(raw.width, raw.height);
    img.valid.assign(img.pixel_count(), 1);

    const double sat_raw = spec.saturation_threshold * max_raw;
    const double scale = 1.0 / (max_raw - spec.black_level);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        bool saturated = false;
        for (int c = 0; c < 3; ++c) {
            const double v = raw.channels == 3 ? raw.samples[i * 3 + c] : raw.samples[i];
            if (v >= sat_raw) saturated = true;
            img.channels[c].v[i] = std::max(0.0, v - spec.black_level) * scale;
        }
        if (saturated) img.valid[i] = 0;
    }

    if (spec.mask_path) {
        const RawImage mask = decode_any(*spec.mask_path);
        if (mask.width != raw.width || mask.height != raw.height)
            throw DataError(*spec.mask_path + ": mask dimensions do not match the image");
        for (size_t i = 0; i < n; ++i) {
            for (int c = 0; c < mask.channels; ++c)
                if (mask.samples[i * mask.channels + c] != 0) {
                    img.valid[i] = 0;
                    break;
                }
        }
    }

    if (spec.gamma_decode) {
        const double g = *spec.gamma_decode;
        for (auto& ch : img.channels)
            for (double& v : ch.v) v = std::pow(v, g);
    }

    if (img.valid_count() == 0)
        throw DataError(path + ": all pixels invalid, estimation would be undefined");
    return img;
}

namespace {

uint8_t quantize8(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<uint8_t>(std::lround(v * 255.0));
}

void save_ppm(const Image& img, const std::optional<Illuminant>& illum, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open file for writing");
    out << "P6\n";
    if (illum) {
        char line[96];
        std::snprintf(line, sizeof line, "# illuminant %.9f %.9f %.9f\n", illum->r, illum->g,
                      illum->b);
        out << line;
    }
    out << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) row[3 * x + c] = quantize8(img.channels[c].at(x, y));
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!out) throw DataError(path + ": write failure");
}

void save_png(const Image& img, const std::optional<Illuminant>& illum, const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw DataError(path + ": cannot open file for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw DataError(path + ": libpng init failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw DataError(path + ": PNG encode error");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    char text_value[96];
    png_text text;
    if (illum) {
        std::snprintf(text_value, sizeof text_value, "%.9f %.9f %.9f", illum->r, illum->g,
                      illum->b);
        std::memset(&text, 0, sizeof text);
        text.compression = PNG_TEXT_COMPRESSION_NONE;
        text.key = const_cast<char*>("illuminant");
        text.text = text_value;
        text.text_length = std::strlen(text_value);
        png_set_text(png, info, &text, 1);
    }
    png_write_info(png, info);

    std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) row[3 * x + c] = quantize8(img.channels[c].at(x, y));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace

void save_image(const Image& img, const std::optional<Illuminant>& illum_applied,
                const std::string& path) {
    if (img.width < 1 || img.height < 1) throw DataError("cannot save an empty image");
    const std::string ext = lower_ext(path);
    if (ext == "png")
        save_png(img, illum_applied, path);
    else if (ext == "ppm" || ext == "pnm")
        save_ppm(img, illum_applied, path);
    else
        throw ConfigError(path + ": unsupported output format (use .ppm, .pnm or .png)");
}

// ---- Manifest --------------------------------------------------------------

namespace {

std::string resolve_relative(const std::string& base_dir, const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_absolute() || base_dir.empty()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    const json doc = detail::parse_json_file<DataError>(path);
    if (!doc.is_array()) throw DataError(path + ": manifest must be a JSON array");

    const std::string base_dir = std::filesystem::path(path).parent_path().string();
    std::vector<ManifestEntry> entries;
    entries.reserve(doc.size());
    for (size_t i = 0; i < doc.size(); ++i) {
        const std::string ctx = path + ": entry " + std::to_string(i);
        const json& e = doc[i];
        if (!e.is_object()) throw DataError(ctx + ": entry must be an object");
        detail::reject_unknown_keys<DataError>(
            e, {"image", "illuminant", "black_level", "saturation", "mask"}, ctx);
        if (!e.contains("image")) throw DataError(ctx + ": missing required field \"image\"");
        if (!e.contains("illuminant"))
            throw DataError(ctx + ": missing required field \"illuminant\"");
        if (!e["image"].is_string()) throw DataError(ctx + ": \"image\" must be a string");
        const json& ill = e["illuminant"];
        if (!ill.is_array() || ill.size() != 3 || !ill[0].is_number() || !ill[1].is_number() ||
            !ill[2].is_number())
            throw DataError(ctx + ": \"illuminant\" must be an array of 3 numbers");

        ManifestEntry entry;
        entry.image_path = resolve_relative(base_dir, e["image"].get<std::string>());
        Illuminant gt{ill[0].get<double>(), ill[1].get<double>(), ill[2].get<double>()};
        if (!(gt.r > 0.0 && gt.g > 0.0 && gt.b > 0.0))
            throw DataError(ctx + ": illuminant components must be strictly positive");
        entry.ground_truth = gt.normalized();

        if (e.contains("black_level")) {
            if (!e["black_level"].is_number())
                throw DataError(ctx + ": \"black_level\" must be a number");
            entry.preprocess.black_level = e["black_level"].get<double>();
            if (entry.preprocess.black_level < 0.0)
                throw DataError(ctx + ": \"black_level\" must be >= 0");
        }
        if (e.contains("saturation")) {
            if (!e["saturation"].is_number())
                throw DataError(ctx + ": \"saturation\" must be a number");
            entry.preprocess.saturation_threshold = e["saturation"].get<double>();
            if (!(entry.preprocess.saturation_threshold > 0.0 &&
                  entry.preprocess.saturation_threshold <= 1.0))
                throw DataError(ctx + ": \"saturation\" must be in (0, 1]");
        }
        if (e.contains("mask")) {
            if (!e["mask"].is_string()) throw DataError(ctx + ": \"mask\" must be a string");
            entry.preprocess.mask_path = resolve_relative(base_dir, e["mask"].get<std::string>());
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace cvp
