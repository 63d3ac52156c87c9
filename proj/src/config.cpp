#include "cvp/config.hpp"

#include <cmath>

#include "jsonio.hpp"

namespace cvp {

namespace {

using nlohmann::json;

double as_number(const json& v, const std::string& ctx) {
    if (!v.is_number()) throw ConfigError(ctx + " must be a number");
    return v.get<double>();
}

long as_integer(const json& v, const std::string& ctx) {
    if (!v.is_number_integer()) throw ConfigError(ctx + " must be an integer");
    return v.get<long>();
}

bool as_bool(const json& v, const std::string& ctx) {
    if (!v.is_boolean()) throw ConfigError(ctx + " must be a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& ctx) {
    if (!v.is_string()) throw ConfigError(ctx + " must be a string");
    return v.get<std::string>();
}

PoolingSpec pooling_from_json(const json& p, const std::string& ctx) {
    if (!p.is_object()) throw ConfigError(ctx + " must be an object with a \"kind\" key");
    if (!p.contains("kind")) throw ConfigError(ctx + ": missing \"kind\"");
    const std::string kind = as_string(p["kind"], ctx + ".kind");

    PoolingSpec spec;
    if (kind == "max") {
        detail::reject_unknown_keys<ConfigError>(p, {"kind"}, ctx);
        spec.kind = PoolingSpec::Kind::max;
    } else if (kind == "minkowski") {
        detail::reject_unknown_keys<ConfigError>(p, {"kind", "p"}, ctx);
        if (!p.contains("p")) throw ConfigError(ctx + ": minkowski pooling requires \"p\"");
        spec.kind = PoolingSpec::Kind::minkowski;
        spec.p = as_number(p["p"], ctx + ".p");
    } else if (kind == "top_x") {
        detail::reject_unknown_keys<ConfigError>(p, {"kind", "x", "binned"}, ctx);
        if (!p.contains("x")) throw ConfigError(ctx + ": top_x pooling requires \"x\"");
        spec.kind = PoolingSpec::Kind::top_x;
        spec.x = as_number(p["x"], ctx + ".x");
        if (p.contains("binned")) spec.binned = as_bool(p["binned"], ctx + ".binned");
    } else if (kind == "cvp") {
        detail::reject_unknown_keys<ConfigError>(p, {"kind", "sigma", "c_min", "x_min", "x_max"},
                                                 ctx);
        spec.kind = PoolingSpec::Kind::cvp;
        if (p.contains("sigma"))
            spec.cvp_cfg.sigma = static_cast<int>(as_integer(p["sigma"], ctx + ".sigma"));
        if (p.contains("c_min")) spec.cvp_cfg.c_min = as_number(p["c_min"], ctx + ".c_min");
        if (p.contains("x_min")) spec.cvp_cfg.x_min = as_number(p["x_min"], ctx + ".x_min");
        if (p.contains("x_max")) spec.cvp_cfg.x_max = as_number(p["x_max"], ctx + ".x_max");
    } else {
        throw ConfigError(ctx + ": unknown pooling kind \"" + kind +
                          "\" (expected max, minkowski, top_x or cvp)");
    }
    spec.validate();
    return spec;
}

EstimatorSpec estimator_from_json(const json& e, const std::string& ctx) {
    if (!e.is_object()) throw ConfigError(ctx + " must be an object");
    detail::reject_unknown_keys<ConfigError>(e, {"method", "pooling", "sigma", "k_surround"},
                                             ctx);
    if (!e.contains("method")) throw ConfigError(ctx + ": missing \"method\"");

    EstimatorSpec spec;
    spec.method = parse_method(as_string(e["method"], ctx + ".method"));

    if (e.contains("pooling")) {
        spec.pooling = pooling_from_json(e["pooling"], ctx + ".pooling");
    } else {
        spec.pooling = spec.method == Method::grey_world ? PoolingSpec::make_minkowski(1.0)
                                                         : PoolingSpec::make_max();
    }

    const bool takes_sigma = spec.method == Method::grey_edge_1 ||
                             spec.method == Method::grey_edge_2 ||
                             spec.method == Method::double_opponency;
    if (e.contains("sigma")) {
        if (!takes_sigma)
            throw ConfigError(ctx + ": \"sigma\" applies only to grey_edge_1, grey_edge_2 and "
                                    "double_opponency");
        spec.sigma = as_number(e["sigma"], ctx + ".sigma");
    }
    if (e.contains("k_surround")) {
        if (spec.method != Method::double_opponency)
            throw ConfigError(ctx + ": \"k_surround\" applies only to double_opponency");
        spec.k_surround = as_number(e["k_surround"], ctx + ".k_surround");
    }
    spec.validate();
    return spec;
}

SyntheticSceneSpec scene_from_json(const json& o, const std::string& ctx) {
    if (!o.is_object()) throw ConfigError(ctx + " must be an object");
    detail::reject_unknown_keys<ConfigError>(
        o,
        {"width", "height", "patch_rows", "patch_cols", "illuminant_min", "illuminant_max",
         "noise_sigma", "salt_fraction", "white_patch"},
        ctx);
    SyntheticSceneSpec s;
    if (o.contains("width")) s.width = static_cast<int>(as_integer(o["width"], ctx + ".width"));
    if (o.contains("height"))
        s.height = static_cast<int>(as_integer(o["height"], ctx + ".height"));
    if (o.contains("patch_rows"))
        s.patch_rows = static_cast<int>(as_integer(o["patch_rows"], ctx + ".patch_rows"));
    if (o.contains("patch_cols"))
        s.patch_cols = static_cast<int>(as_integer(o["patch_cols"], ctx + ".patch_cols"));
    if (o.contains("illuminant_min"))
        s.illuminant_min = as_number(o["illuminant_min"], ctx + ".illuminant_min");
    if (o.contains("illuminant_max"))
        s.illuminant_max = as_number(o["illuminant_max"], ctx + ".illuminant_max");
    if (o.contains("noise_sigma"))
        s.noise_sigma = as_number(o["noise_sigma"], ctx + ".noise_sigma");
    if (o.contains("salt_fraction"))
        s.salt_fraction = as_number(o["salt_fraction"], ctx + ".salt_fraction");
    if (o.contains("white_patch"))
        s.white_patch = as_bool(o["white_patch"], ctx + ".white_patch");
    s.validate();
    return s;
}

}  // namespace

PoolingSpec parse_pooling_string(const std::string& text) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (;;) {
        const size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    const auto to_number = [&](const std::string& s) {
        try {
            size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("invalid number \"" + s + "\" in pooling \"" + text + "\"");
        }
    };

    if (parts[0] == "max" && parts.size() == 1) return PoolingSpec::make_max();
    if (parts[0] == "cvp" && parts.size() == 1) return PoolingSpec::make_cvp();
    if (parts[0] == "minkowski" && parts.size() == 2)
        return PoolingSpec::make_minkowski(to_number(parts[1]));
    if (parts[0] == "top_x" && (parts.size() == 2 || parts.size() == 3)) {
        const bool binned = parts.size() == 3;
        if (binned && parts[2] != "binned")
            throw ConfigError("invalid pooling \"" + text + "\" (did you mean top_x:X:binned?)");
        return PoolingSpec::make_top_x(to_number(parts[1]), binned);
    }
    throw ConfigError("invalid pooling \"" + text +
                      "\" (expected max, minkowski:P, top_x:X, top_x:X:binned or cvp)");
}

RunConfig load_run_config(const std::string& path) {
    const json doc = detail::parse_json_file<ConfigError>(path);
    if (!doc.is_object()) throw ConfigError(path + ": config must be a JSON object");
    detail::reject_unknown_keys<ConfigError>(doc, {"estimators", "parallelism", "seed",
                                                   "synthetic"},
                                             path);

    RunConfig cfg;
    if (doc.contains("estimators")) {
        const json& arr = doc["estimators"];
        if (!arr.is_array()) throw ConfigError(path + ": \"estimators\" must be an array");
        for (size_t i = 0; i < arr.size(); ++i)
            cfg.estimators.push_back(
                estimator_from_json(arr[i], path + ": estimators[" + std::to_string(i) + "]"));
    }
    if (doc.contains("parallelism")) {
        cfg.parallelism = static_cast<int>(as_integer(doc["parallelism"], path + ".parallelism"));
        if (cfg.parallelism < 1) throw ConfigError(path + ": parallelism must be >= 1");
    }
    if (doc.contains("seed")) {
        const json& s = doc["seed"];
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0))
            throw ConfigError(path + ": seed must be a non-negative integer");
        cfg.seed = s.get<uint64_t>();
    }
    if (doc.contains("synthetic")) {
        const json& syn = doc["synthetic"];
        if (!syn.is_object()) throw ConfigError(path + ": \"synthetic\" must be an object");
        detail::reject_unknown_keys<ConfigError>(syn, {"count", "spec"}, path + ".synthetic");
        if (!syn.contains("count"))
            throw ConfigError(path + ": synthetic corpus requires \"count\"");
        SyntheticCorpus corpus;
        corpus.count = as_integer(syn["count"], path + ".synthetic.count");
        if (corpus.count < 1) throw ConfigError(path + ": synthetic count must be >= 1");
        if (syn.contains("spec"))
            corpus.scene = scene_from_json(syn["spec"], path + ".synthetic.spec");
        cfg.synthetic = corpus;
    }
    return cfg;
}

SweepGrid load_sweep_grid(const std::string& path) {
    const json doc = detail::parse_json_file<ConfigError>(path);
    if (!doc.is_object()) throw ConfigError(path + ": grid must be a JSON object");
    detail::reject_unknown_keys<ConfigError>(doc, {"sigmas", "ks", "methods", "poolings"}, path);

    SweepGrid grid;
    const auto load_numbers = [&](const char* key, std::vector<double>& out) {
        if (!doc.contains(key)) return;
        const json& arr = doc[key];
        if (!arr.is_array())
            throw ConfigError(path + ": \"" + key + "\" must be an array of numbers");
        for (const json& v : arr) out.push_back(as_number(v, path + std::string(".") + key));
    };
    load_numbers("sigmas", grid.sigmas);
    load_numbers("ks", grid.ks);

    if (doc.contains("methods")) {
        const json& arr = doc["methods"];
        if (!arr.is_array()) throw ConfigError(path + ": \"methods\" must be an array");
        for (const json& v : arr) grid.methods.push_back(parse_method(as_string(v, "method")));
    }
    if (doc.contains("poolings")) {
        const json& arr = doc["poolings"];
        if (!arr.is_array()) throw ConfigError(path + ": \"poolings\" must be an array");
        for (const json& v : arr) {
            const std::string name = as_string(v, "pooling");
            if (name == "max")
                grid.poolings.push_back(PoolingSpec::make_max());
            else if (name == "cvp")
                grid.poolings.push_back(PoolingSpec::make_cvp());
            else
                throw ConfigError(path + ": sweep poolings must be \"max\" or \"cvp\"");
        }
    }
    grid.validate();
    return grid;
}

SyntheticSceneSpec load_scene_spec(const std::string& path) {
    const json doc = detail::parse_json_file<ConfigError>(path);
    return scene_from_json(doc, path);
}

}  // namespace cvp
