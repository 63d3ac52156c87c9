#include "cvp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

namespace cvp {

void RunConfig::validate() const {
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    const bool has_manifest = !manifest_path.empty();
    const bool has_synth = synthetic.has_value();
    if (has_manifest && has_synth)
        throw ConfigError("give either a manifest or a synthetic corpus, not both");
    if (!has_manifest && !has_synth)
        throw ConfigError("no corpus: give a manifest path or a synthetic corpus block");
    if (has_synth) {
        if (synthetic->count < 1) throw ConfigError("synthetic corpus count must be >= 1");
        synthetic->scene.validate();
    }
}

void SweepGrid::validate() const {
    if (sigmas.empty() || methods.empty() || poolings.empty())
        throw ConfigError("sweep grid requires non-empty sigmas, methods and poolings");
    for (double s : sigmas)
        if (!(s > 0.0)) throw ConfigError("sweep sigmas must be > 0");
    bool has_do = false;
    for (Method m : methods) {
        if (m == Method::white_patch || m == Method::grey_world)
            throw ConfigError("sweep methods must take a sigma (grey_edge_1, grey_edge_2 or "
                              "double_opponency)");
        if (m == Method::double_opponency) has_do = true;
    }
    if (has_do && ks.empty())
        throw ConfigError("sweeping double_opponency requires a non-empty ks axis");
    if (!has_do && !ks.empty())
        throw ConfigError("ks axis given but double_opponency is not among the methods");
    for (double k : ks)
        if (!(k >= 0.0 && k <= 1.0)) throw ConfigError("sweep ks must be in [0, 1]");
    for (const PoolingSpec& p : poolings) {
        p.validate();
        if (p.kind != PoolingSpec::Kind::max && p.kind != PoolingSpec::Kind::cvp)
            throw ConfigError("sweep poolings must be max or cvp");
    }
}

namespace {

// Runs fn(0..n-1) on `workers` threads. Work items write only their own
// slots, so the merged result is independent of scheduling.
void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
    workers = static_cast<int>(std::min<long>(workers, n));
    if (workers <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct CorpusItem {
    Image img;
    Illuminant gt;
};

struct Corpus {
    long count = 0;
    std::vector<std::string> ids;
    std::function<CorpusItem(long)> get;  // pure, safe to call concurrently
};

Corpus make_corpus(const RunConfig& cfg) {
    Corpus c;
    if (!cfg.manifest_path.empty()) {
        auto entries =
            std::make_shared<const std::vector<ManifestEntry>>(load_manifest(cfg.manifest_path));
        c.count = static_cast<long>(entries->size());
        for (const auto& e : *entries) c.ids.push_back(e.image_path);
        c.get = [entries](long i) {
            const ManifestEntry& e = (*entries)[static_cast<size_t>(i)];
            return CorpusItem{load_image(e.image_path, e.preprocess), e.ground_truth};
        };
    } else {
        c.count = cfg.synthetic->count;
        const SyntheticSceneSpec spec = cfg.synthetic->scene;
        const uint64_t seed = cfg.seed;
        for (long i = 0; i < c.count; ++i) c.ids.push_back("synthetic:" + std::to_string(i));
        c.get = [spec, seed](long i) {
            SyntheticScene s = generate_synthetic(spec, mix_seed(seed, static_cast<uint64_t>(i)));
            return CorpusItem{std::move(s.image), s.illuminant};
        };
    }
    return c;
}

bool method_has_sigma(Method m) {
    return m == Method::grey_edge_1 || m == Method::grey_edge_2 ||
           m == Method::double_opponency;
}

std::string fmt(const char* f, double v) {
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

void append_row(std::string& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    out += '\n';
}

}  // namespace

BenchReport run_bench(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.estimators.empty()) throw ConfigError("bench requires at least one estimator");
    for (const EstimatorSpec& e : cfg.estimators) e.validate();

    const Corpus corpus = make_corpus(cfg);
    BenchReport rep;
    rep.estimators.resize(cfg.estimators.size());
    for (size_t j = 0; j < cfg.estimators.size(); ++j) {
        rep.estimators[j].spec = cfg.estimators[j];
        rep.estimators[j].outcomes.resize(static_cast<size_t>(corpus.count));
    }

    parallel_for(corpus.count, cfg.parallelism, [&](long i) {
        const CorpusItem item = corpus.get(i);
        for (size_t j = 0; j < cfg.estimators.size(); ++j) {
            ImageOutcome& out = rep.estimators[j].outcomes[static_cast<size_t>(i)];
            out.image_id = corpus.ids[static_cast<size_t>(i)];
            try {
                out.est = estimate(item.img, cfg.estimators[j]);
                out.recovery_deg = recovery_error_deg(out.est.illuminant, item.gt);
                out.reproduction_deg = reproduction_error_deg(out.est.illuminant, item.gt);
                out.ok = true;
            } catch (const DataError& ex) {
                out.ok = false;
                out.error = ex.what();
            }
        }
    });

    for (EstimatorReport& er : rep.estimators) {
        std::vector<double> errs;
        errs.reserve(er.outcomes.size());
        for (const ImageOutcome& o : er.outcomes) {
            if (o.ok) {
                errs.push_back(o.recovery_deg);
            } else {
                ++er.n_failed;
                std::fprintf(stderr, "warning: %s: %s/%s: %s\n", o.image_id.c_str(),
                             method_name(er.spec.method).c_str(),
                             er.spec.pooling.label().c_str(), o.error.c_str());
            }
        }
        er.stats = errs.empty() ? ErrorStats{} : summarize(errs);
    }

    if (!cfg.output_path.empty()) {
        std::ofstream out(cfg.output_path, std::ios::binary);
        if (!out) throw DataError(cfg.output_path + ": cannot open file for writing");
        out << bench_csv(rep);
        if (!out) throw DataError(cfg.output_path + ": write failure");
    }
    return rep;
}

std::string bench_csv(const BenchReport& rep) {
    std::string out =
        "image,method,pooling,sigma,k,x_r,x_g,x_b,est_r,est_g,est_b,recovery_deg,"
        "reproduction_deg\n";
    for (const EstimatorReport& er : rep.estimators) {
        const EstimatorSpec& s = er.spec;
        const std::string sigma_f = method_has_sigma(s.method) ? fmt("%g", s.sigma) : "";
        const std::string k_f =
            s.method == Method::double_opponency ? fmt("%g", s.k_surround) : "";
        for (const ImageOutcome& o : er.outcomes) {
            std::vector<std::string> f{o.image_id, method_name(s.method), s.pooling.label(),
                                       sigma_f, k_f};
            if (o.ok) {
                if (o.est.pool.has_selection)
                    for (int c = 0; c < 3; ++c) f.push_back(fmt("%.6f", o.est.pool.x_percent[c]));
                else
                    f.insert(f.end(), {"", "", ""});
                for (int c = 0; c < 3; ++c) f.push_back(fmt("%.6f", o.est.illuminant[c]));
                f.push_back(fmt("%.4f", o.recovery_deg));
                f.push_back(fmt("%.4f", o.reproduction_deg));
            } else {
                f.insert(f.end(), 8, "");
            }
            append_row(out, f);
        }
    }

    out += "\nmethod,pooling,sigma,k,n,mean,median,trimean,best25,worst25,n_failed\n";
    for (const EstimatorReport& er : rep.estimators) {
        const EstimatorSpec& s = er.spec;
        std::vector<std::string> f{method_name(s.method), s.pooling.label(),
                                   method_has_sigma(s.method) ? fmt("%g", s.sigma) : "",
                                   s.method == Method::double_opponency ? fmt("%g", s.k_surround)
                                                                       : "",
                                   std::to_string(er.stats.n)};
        if (er.stats.n > 0) {
            f.push_back(fmt("%.4f", er.stats.mean));
            f.push_back(fmt("%.4f", er.stats.median));
            f.push_back(fmt("%.4f", er.stats.trimean));
            f.push_back(fmt("%.4f", er.stats.best25_mean));
            f.push_back(fmt("%.4f", er.stats.worst25_mean));
        } else {
            f.insert(f.end(), 5, "");
        }
        f.push_back(std::to_string(er.n_failed));
        append_row(out, f);
    }
    return out;
}

namespace {

// Invokes fn once per grid cell in the canonical order: method, sigma,
// k (double_opponency only), pooling.
void for_each_cell(const SweepGrid& grid,
                   const std::function<void(Method, double, double, bool, size_t)>& fn) {
    for (Method m : grid.methods) {
        const bool with_k = m == Method::double_opponency;
        for (double sigma : grid.sigmas) {
            if (with_k) {
                for (double k : grid.ks)
                    for (size_t pi = 0; pi < grid.poolings.size(); ++pi)
                        fn(m, sigma, k, true, pi);
            } else {
                for (size_t pi = 0; pi < grid.poolings.size(); ++pi)
                    fn(m, sigma, 0.0, false, pi);
            }
        }
    }
}

}  // namespace

SweepReport run_sweep(const RunConfig& cfg, const SweepGrid& grid) {
    cfg.validate();
    grid.validate();
    const Corpus corpus = make_corpus(cfg);

    SweepReport rep;
    for_each_cell(grid, [&](Method m, double sigma, double k, bool has_k, size_t pi) {
        SweepCell cell;
        cell.method = m;
        cell.pooling = grid.poolings[pi];
        cell.sigma = sigma;
        cell.k_surround = k;
        cell.has_k = has_k;
        rep.cells.push_back(std::move(cell));
    });

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> errs(rep.cells.size(),
                                          std::vector<double>(corpus.count, nan));

    parallel_for(corpus.count, cfg.parallelism, [&](long i) {
        const CorpusItem item = corpus.get(i);

        // The cvp selection percentage is a property of the image alone, so
        // one computation per cvp pooling serves the whole grid.
        std::vector<std::optional<std::array<double, 3>>> sel(grid.poolings.size());
        for (size_t pi = 0; pi < grid.poolings.size(); ++pi) {
            if (grid.poolings[pi].kind != PoolingSpec::Kind::cvp) continue;
            try {
                sel[pi] = selection_percentages(item.img, grid.poolings[pi].cvp_cfg);
            } catch (const DataError&) {
                // leave nullopt; this image's cvp cells record a failure
            }
        }

        size_t cell = 0;
        FeatureMap map;
        bool map_ok = false;
        for_each_cell(grid, [&](Method m, double sigma, double k, bool has_k, size_t pi) {
            EstimatorSpec spec;
            spec.method = m;
            spec.sigma = sigma;
            spec.k_surround = has_k ? k : spec.k_surround;
            spec.pooling = grid.poolings[pi];
            // Poolings iterate innermost: one feature map serves every
            // pooling of the same (method, sigma, k).
            if (pi == 0) {
                try {
                    map = estimator_feature_map(item.img, spec);
                    map_ok = true;
                } catch (const DataError&) {
                    map_ok = false;
                }
            }
            const bool needs_sel = spec.pooling.kind == PoolingSpec::Kind::cvp;
            if (map_ok && (!needs_sel || sel[pi])) {
                try {
                    spec.validate();
                    const EstimateResult est = estimate_from_map(map, spec, sel[pi]);
                    errs[cell][static_cast<size_t>(i)] =
                        recovery_error_deg(est.illuminant, item.gt);
                } catch (const DataError&) {
                    // leave the NaN failure marker
                }
            }
            ++cell;
        });
    });

    for (size_t ci = 0; ci < rep.cells.size(); ++ci) {
        SweepCell& cell = rep.cells[ci];
        for (double e : errs[ci]) {
            if (std::isnan(e))
                ++cell.n_failed;
            else
                cell.errors_deg.push_back(e);
        }
        cell.stats = cell.errors_deg.empty() ? ErrorStats{} : summarize(cell.errors_deg);
    }
    return rep;
}

std::string sweep_csv(const SweepReport& rep) {
    std::string out = "method,pooling,sigma,k,median,trimean,mean\n";
    for (const SweepCell& c : rep.cells) {
        std::vector<std::string> f{method_name(c.method), c.pooling.label(),
                                   fmt("%g", c.sigma), c.has_k ? fmt("%g", c.k_surround) : ""};
        if (c.stats.n > 0) {
            f.push_back(fmt("%.4f", c.stats.median));
            f.push_back(fmt("%.4f", c.stats.trimean));
            f.push_back(fmt("%.4f", c.stats.mean));
        } else {
            f.insert(f.end(), 3, "");
        }
        append_row(out, f);
    }

    // Best/worst over the k axis, for plotting envelope curves against sigma.
    struct Group {
        std::string key;
        std::vector<const SweepCell*> cells;
    };
    std::vector<Group> groups;
    for (const SweepCell& c : rep.cells) {
        if (!c.has_k) continue;
        const std::string key =
            method_name(c.method) + "|" + c.pooling.label() + "|" + fmt("%g", c.sigma);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return g.key == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = groups.end() - 1;
        }
        it->cells.push_back(&c);
    }
    if (groups.empty()) return out;

    out += "\nmethod,pooling,sigma,which,k,median,trimean,mean\n";
    for (const Group& g : groups) {
        const SweepCell* best = nullptr;
        const SweepCell* worst = nullptr;
        for (const SweepCell* c : g.cells) {
            if (c->stats.n == 0) continue;
            if (!best || c->stats.median < best->stats.median) best = c;
            if (!worst || c->stats.median > worst->stats.median) worst = c;
        }
        if (!best) continue;  // every k failed on every image
        for (const auto& [which, c] : {std::pair<const char*, const SweepCell*>{"best", best},
                                       {"worst", worst}}) {
            append_row(out, {method_name(c->method), c->pooling.label(), fmt("%g", c->sigma),
                             which, fmt("%g", c->k_surround), fmt("%.4f", c->stats.median),
                             fmt("%.4f", c->stats.trimean), fmt("%.4f", c->stats.mean)});
        }
    }
    return out;
}

}  // namespace cvp
