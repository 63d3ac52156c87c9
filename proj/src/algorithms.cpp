#include "cvp/algorithms.hpp"

#include <cmath>

namespace cvp {

Method parse_method(const std::string& name) {
    if (name == "white_patch") return Method::white_patch;
    if (name == "grey_world") return Method::grey_world;
    if (name == "grey_edge_1") return Method::grey_edge_1;
    if (name == "grey_edge_2") return Method::grey_edge_2;
    if (name == "double_opponency") return Method::double_opponency;
    throw ConfigError("unknown method \"" + name +
                      "\" (expected white_patch, grey_world, grey_edge_1, grey_edge_2 or "
                      "double_opponency)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::white_patch: return "white_patch";
        case Method::grey_world: return "grey_world";
        case Method::grey_edge_1: return "grey_edge_1";
        case Method::grey_edge_2: return "grey_edge_2";
        case Method::double_opponency: return "double_opponency";
    }
    return "?";
}

void EstimatorSpec::validate() const {
    pooling.validate();
    switch (method) {
        case Method::grey_world:
            if (pooling.kind != PoolingSpec::Kind::minkowski || pooling.p != 1.0)
                throw ConfigError(
                    "grey_world pools with the plain mean by definition; it takes no other "
                    "pooling operator");
            break;
        case Method::grey_edge_1:
        case Method::grey_edge_2:
            if (!(sigma > 0.0)) throw ConfigError(method_name(method) + " requires sigma > 0");
            break;
        case Method::double_opponency:
            if (!(sigma > 0.0)) throw ConfigError("double_opponency requires sigma > 0");
            if (!(k_surround >= 0.0 && k_surround <= 1.0))
                throw ConfigError("double_opponency requires k_surround in [0, 1]");
            break;
        case Method::white_patch:
            break;
    }
}

namespace {

constexpr double kDogSurroundRatio = 3.0;

// Orthonormal opponent basis; rows are the analysis directions. Being
// orthonormal, the inverse transform is the transpose.
//   O1 = (R - G)/sqrt(2), O2 = (R + G - 2B)/sqrt(6), O3 = (R + G + B)/sqrt(3)
FeatureMap opponent_dog_map(const Image& img, double sigma, double k_surround) {
    const int w = img.width, h = img.height;
    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);

    std::array<Raster, 3> opp;
    for (auto& o : opp) o = Raster(w, h);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const double r = img.channels[0].v[i];
        const double g = img.channels[1].v[i];
        const double b = img.channels[2].v[i];
        opp[0].v[i] = (r - g) / s2;
        opp[1].v[i] = (r + g - 2.0 * b) / s6;
        opp[2].v[i] = (r + g + b) / s3;
    }

    std::array<Raster, 3> resp;
    for (int i = 0; i < 3; ++i)
        resp[i] = dog_response(opp[i], sigma, kDogSurroundRatio, k_surround);

    FeatureMap m;
    m.width = w;
    m.height = h;
    for (auto& ch : m.channels) ch = Raster(w, h);
    for (size_t i = 0; i < n; ++i) {
        const double d1 = resp[0].v[i], d2 = resp[1].v[i], d3 = resp[2].v[i];
        const double r = d1 / s2 + d2 / s6 + d3 / s3;
        const double g = -d1 / s2 + d2 / s6 + d3 / s3;
        const double b = -2.0 * d2 / s6 + d3 / s3;
        m.channels[0].v[i] = std::max(0.0, r);
        m.channels[1].v[i] = std::max(0.0, g);
        m.channels[2].v[i] = std::max(0.0, b);
    }

    // The surround kernel is the widest filter that ran: erode its support.
    const int border = kernel_radius(kDogSurroundRatio * sigma);
    m.valid.assign(n, 0);
    for (int y = border; y < h - border; ++y)
        for (int x = border; x < w - border; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            m.valid[i] = img.valid[i];
        }
    return m;
}

Illuminant normalize_pool(const PoolResult& r) {
    Illuminant e{r.value[0], r.value[1], r.value[2]};
    if (!(e.norm() > 0.0) || !std::isfinite(e.norm()))
        throw DataError("degenerate feature map: pooled response is zero");
    return e.normalized();
}

}  // namespace

FeatureMap estimator_feature_map(const Image& img, const EstimatorSpec& spec) {
    switch (spec.method) {
        case Method::white_patch:
        case Method::grey_world:
            return image_as_feature_map(img);
        case Method::grey_edge_1:
            return edge_feature_map(img, spec.sigma, 1);
        case Method::grey_edge_2:
            return edge_feature_map(img, spec.sigma, 2);
        case Method::double_opponency:
            return opponent_dog_map(img, spec.sigma, spec.k_surround);
    }
    throw ConfigError("unknown method");
}

std::array<double, 3> selection_percentages(const Image& img, const CvpConfig& cfg) {
    return cvp_percentage(local_contrast(img, cfg.sigma), cfg);
}

EstimateResult estimate_from_map(const FeatureMap& map, const EstimatorSpec& spec,
                                 const std::optional<std::array<double, 3>>& selection_x) {
    if (map.valid_count() == 0)
        throw DataError("degenerate feature map: no valid pixels (image smaller than the "
                        "filter support?)");
    EstimateResult res;
    if (spec.pooling.kind == PoolingSpec::Kind::cvp) {
        if (!selection_x)
            throw ConfigError(
                "cvp pooling selects by the source image's contrast; pass the percentages "
                "from selection_percentages() or use estimate()");
        res.pool = pool_top_x(map, *selection_x);
    } else {
        res.pool = pool(map, spec.pooling);
    }
    res.illuminant = normalize_pool(res.pool);
    return res;
}

EstimateResult estimate(const Image& img, const EstimatorSpec& spec) {
    spec.validate();
    const FeatureMap map = estimator_feature_map(img, spec);
    if (spec.pooling.kind == PoolingSpec::Kind::cvp)
        return estimate_from_map(map, spec,
                                 selection_percentages(img, spec.pooling.cvp_cfg));
    return estimate_from_map(map, spec);
}

Illuminant white_patch(const Image& img, const PoolingSpec& pooling) {
    EstimatorSpec spec;
    spec.method = Method::white_patch;
    spec.pooling = pooling;
    return estimate(img, spec).illuminant;
}

Illuminant grey_world(const Image& img) {
    EstimatorSpec spec;
    spec.method = Method::grey_world;
    spec.pooling = PoolingSpec::make_minkowski(1.0);
    return estimate(img, spec).illuminant;
}

Illuminant grey_edge(const Image& img, int order, double sigma, const PoolingSpec& pooling) {
    EstimatorSpec spec;
    spec.method = order == 1 ? Method::grey_edge_1 : Method::grey_edge_2;
    if (order != 1 && order != 2) throw ConfigError("grey_edge order must be 1 or 2");
    spec.sigma = sigma;
    spec.pooling = pooling;
    return estimate(img, spec).illuminant;
}

Illuminant double_opponency(const Image& img, double sigma, double k_surround,
                            const PoolingSpec& pooling) {
    EstimatorSpec spec;
    spec.method = Method::double_opponency;
    spec.sigma = sigma;
    spec.k_surround = k_surround;
    spec.pooling = pooling;
    return estimate(img, spec).illuminant;
}

Image correct_image(const Image& img, const Illuminant& e) {
    if (!(e.r > 0.0 && e.g > 0.0 && e.b > 0.0))
        throw DataError("cannot correct by an illuminant with a non-positive component");
    const double neutral = 1.0 / std::sqrt(3.0);
    Image out = img;
    for (int c = 0; c < 3; ++c) {
        const double gain = neutral / e[c];
        for (double& v : out.channels[c].v) v *= gain;
    }
    return out;
}

}  // namespace cvp
