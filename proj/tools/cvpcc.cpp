#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cvp/algorithms.hpp"
#include "cvp/bench.hpp"
#include "cvp/config.hpp"
#include "cvp/imgio.hpp"
#include "cvp/synthetic.hpp"

namespace {

// Bright synthetic pixels (the white patch, salt) must survive the default
// saturation flagging when the corpus is reloaded from disk, so written
// scenes are dimmed by a fixed headroom factor below the 0.98 threshold.
constexpr double kSynthHeadroom = 0.95;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cvp::DataError(path + ": cannot open file for writing");
    out << text;
    if (!out) throw cvp::DataError(path + ": write failure");
}

struct EstimateArgs {
    std::string image;
    std::string method = "white_patch";
    std::string pooling = "max";
    double sigma = 2.0;
    double k_surround = 0.5;
    std::string correct_path;
    double black_level = 0.0;
    double saturation = 0.98;
    std::string mask;
    double gamma = 1.0;
};

int do_estimate(const CLI::App& cmd, const EstimateArgs& a) {
    cvp::EstimatorSpec spec;
    spec.method = cvp::parse_method(a.method);

    const bool explicit_pooling = cmd.count("--pooling") > 0;
    if (explicit_pooling)
        spec.pooling = cvp::parse_pooling_string(a.pooling);
    else
        spec.pooling = spec.method == cvp::Method::grey_world
                           ? cvp::PoolingSpec::make_minkowski(1.0)
                           : cvp::PoolingSpec::make_max();

    const bool takes_sigma = spec.method == cvp::Method::grey_edge_1 ||
                             spec.method == cvp::Method::grey_edge_2 ||
                             spec.method == cvp::Method::double_opponency;
    if (cmd.count("--sigma") > 0 && !takes_sigma)
        throw cvp::ConfigError(
            "--sigma applies only to grey_edge_1, grey_edge_2 and double_opponency");
    if (cmd.count("--k") > 0 && spec.method != cvp::Method::double_opponency)
        throw cvp::ConfigError("--k applies only to double_opponency");
    spec.sigma = a.sigma;
    spec.k_surround = a.k_surround;
    spec.validate();

    cvp::PreprocessSpec pp;
    pp.black_level = a.black_level;
    pp.saturation_threshold = a.saturation;
    if (cmd.count("--mask") > 0) pp.mask_path = a.mask;
    if (cmd.count("--gamma-decode") > 0) pp.gamma_decode = a.gamma;

    const cvp::Image img = cvp::load_image(a.image, pp);
    const cvp::EstimateResult res = cvp::estimate(img, spec);

    std::printf("method: %s\npooling: %s\n", cvp::method_name(spec.method).c_str(),
                spec.pooling.label().c_str());
    std::printf("illuminant: %.6f %.6f %.6f\n", res.illuminant.r, res.illuminant.g,
                res.illuminant.b);
    if (res.pool.has_selection) {
        std::printf("x_percent: %.6f %.6f %.6f\n", res.pool.x_percent[0], res.pool.x_percent[1],
                    res.pool.x_percent[2]);
        std::printf("pooled_count: %ld %ld %ld\n", res.pool.pooled_count[0],
                    res.pool.pooled_count[1], res.pool.pooled_count[2]);
        std::printf("threshold: %.6f %.6f %.6f\n", res.pool.threshold[0], res.pool.threshold[1],
                    res.pool.threshold[2]);
    }
    if (!a.correct_path.empty()) {
        cvp::save_image(cvp::correct_image(img, res.illuminant), res.illuminant, a.correct_path);
        std::printf("corrected image written to %s\n", a.correct_path.c_str());
    }
    return 0;
}

int do_bench(const std::string& config_path, const std::string& manifest,
             const std::string& out_path) {
    cvp::RunConfig cfg = cvp::load_run_config(config_path);
    if (!manifest.empty()) cfg.manifest_path = manifest;
    cfg.output_path = out_path;
    const cvp::BenchReport rep = cvp::run_bench(cfg);
    for (const cvp::EstimatorReport& er : rep.estimators) {
        if (er.stats.n > 0)
            std::printf("%s/%s: n=%ld median=%.4f trimean=%.4f mean=%.4f failed=%ld\n",
                        cvp::method_name(er.spec.method).c_str(),
                        er.spec.pooling.label().c_str(), er.stats.n, er.stats.median,
                        er.stats.trimean, er.stats.mean, er.n_failed);
        else
            std::printf("%s/%s: no successful estimates (failed=%ld)\n",
                        cvp::method_name(er.spec.method).c_str(),
                        er.spec.pooling.label().c_str(), er.n_failed);
    }
    std::printf("results written to %s\n", out_path.c_str());
    return 0;
}

int do_sweep(const std::string& config_path, const std::string& manifest,
             const std::string& grid_path, const std::string& out_path) {
    cvp::RunConfig cfg = cvp::load_run_config(config_path);
    if (!manifest.empty()) cfg.manifest_path = manifest;
    const cvp::SweepGrid grid = cvp::load_sweep_grid(grid_path);
    const cvp::SweepReport rep = cvp::run_sweep(cfg, grid);
    write_text_file(out_path, cvp::sweep_csv(rep));
    std::printf("%zu grid cells written to %s\n", rep.cells.size(), out_path.c_str());
    return 0;
}

int do_synth(const std::string& spec_path, uint64_t seed, long count,
             const std::string& out_dir) {
    cvp::SyntheticSceneSpec spec;
    if (!spec_path.empty()) spec = cvp::load_scene_spec(spec_path);
    if (count < 1) throw cvp::ConfigError("--count must be >= 1");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw cvp::DataError(out_dir + ": cannot create directory: " + ec.message());

    std::string manifest = "[\n";
    for (long i = 0; i < count; ++i) {
        cvp::SyntheticScene scene = cvp::generate_synthetic(spec, cvp::mix_seed(seed, i));
        for (auto& ch : scene.image.channels)
            for (double& v : ch.v) v *= kSynthHeadroom;

        char name[32];
        std::snprintf(name, sizeof name, "img_%04ld.png", i);
        cvp::save_image(scene.image, scene.illuminant,
                        (std::filesystem::path(out_dir) / name).string());

        char entry[256];
        std::snprintf(entry, sizeof entry,
                      "  {\"image\": \"%s\", \"illuminant\": [%.9f, %.9f, %.9f]}%s\n", name,
                      scene.illuminant.r, scene.illuminant.g, scene.illuminant.b,
                      i + 1 < count ? "," : "");
        manifest += entry;
    }
    manifest += "]\n";
    const std::string manifest_path = (std::filesystem::path(out_dir) / "manifest.json").string();
    write_text_file(manifest_path, manifest);
    std::printf("%ld images and %s written\n", count, manifest_path.c_str());
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"cvpcc: colour-constancy estimation with contrast-variant pooling"};
    app.require_subcommand(1);

    EstimateArgs ea;
    CLI::App* est = app.add_subcommand("estimate", "Estimate the illuminant of one image");
    est->add_option("image", ea.image, "input image (PPM/PGM/PNG)")->required();
    est->add_option("--method", ea.method,
                    "white_patch | grey_world | grey_edge_1 | grey_edge_2 | double_opponency")
        ->capture_default_str();
    est->add_option("--pooling", ea.pooling, "max | minkowski:P | top_x:X[:binned] | cvp")
        ->capture_default_str();
    est->add_option("--sigma", ea.sigma, "filter scale for grey_edge_* / double_opponency")
        ->capture_default_str();
    est->add_option("--k", ea.k_surround, "double_opponency surround weight in [0,1]")
        ->capture_default_str();
    est->add_option("--correct", ea.correct_path,
                    "write the von-Kries-corrected image to this path");
    est->add_option("--black-level", ea.black_level, "raw-unit black level to subtract")
        ->capture_default_str();
    est->add_option("--saturation", ea.saturation,
                    "saturation threshold as a fraction of the raw maximum")
        ->capture_default_str();
    est->add_option("--mask", ea.mask, "grayscale mask image; nonzero pixels are excluded");
    est->add_option("--gamma-decode", ea.gamma, "decode exponent applied as v^gamma");

    std::string bench_config, bench_manifest, bench_out;
    CLI::App* bench = app.add_subcommand("bench", "Evaluate estimators over a corpus");
    bench->add_option("--config", bench_config, "run config JSON")->required();
    bench->add_option("--manifest", bench_manifest,
                      "dataset manifest JSON (omit to use the config's synthetic corpus)");
    bench->add_option("--out", bench_out, "output CSV path")->required();

    std::string sweep_config, sweep_manifest, sweep_grid, sweep_out;
    CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep over a corpus");
    sweep->add_option("--config", sweep_config, "run config JSON")->required();
    sweep->add_option("--manifest", sweep_manifest,
                      "dataset manifest JSON (omit to use the config's synthetic corpus)");
    sweep->add_option("--grid", sweep_grid, "sweep grid JSON")->required();
    sweep->add_option("--out", sweep_out, "output CSV path")->required();

    std::string synth_spec, synth_out;
    uint64_t synth_seed = 0;
    long synth_count = 10;
    CLI::App* synth = app.add_subcommand("synth", "Write a synthetic Mondrian corpus to disk");
    synth->add_option("--spec", synth_spec, "scene spec JSON (defaults apply when omitted)");
    synth->add_option("--seed", synth_seed, "corpus base seed")->capture_default_str();
    synth->add_option("--count", synth_count, "number of images")->capture_default_str();
    synth->add_option("--out", synth_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // CLI misuse is a config error
    }

    if (est->parsed()) return do_estimate(*est, ea);
    if (bench->parsed()) return do_bench(bench_config, bench_manifest, bench_out);
    if (sweep->parsed()) return do_sweep(sweep_config, sweep_manifest, sweep_grid, sweep_out);
    if (synth->parsed()) return do_synth(synth_spec, synth_seed, synth_count, synth_out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cvp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const cvp::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
