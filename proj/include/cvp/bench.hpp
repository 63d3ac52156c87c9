#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvp/algorithms.hpp"
#include "cvp/imgio.hpp"
#include "cvp/metrics.hpp"
#include "cvp/synthetic.hpp"

namespace cvp {

/// In-memory corpus source used instead of a manifest on disk.
struct SyntheticCorpus {
    long count = 0;
    SyntheticSceneSpec scene;
};

struct RunConfig {
    std::string manifest_path;  // empty in synthetic mode
    std::vector<EstimatorSpec> estimators;
    std::string output_path;    // CSV; empty = no file written by run_bench itself
    int parallelism = 1;
    uint64_t seed = 0;          // base seed in synthetic mode
    std::optional<SyntheticCorpus> synthetic;

    void validate() const;  // throws ConfigError (also checks manifest XOR synthetic)
};

/// Sweep axes: every (method, pooling, sigma[, k]) cell is evaluated over the
/// whole corpus. Methods must take a sigma; ks apply to double_opponency only.
struct SweepGrid {
    std::vector<double> sigmas;
    std::vector<double> ks;
    std::vector<Method> methods;
    std::vector<PoolingSpec> poolings;

    void validate() const;  // throws ConfigError
};

/// One estimator applied to one image.
struct ImageOutcome {
    std::string image_id;
    bool ok = false;
    std::string error;  // failure reason when !ok
    EstimateResult est; // meaningful when ok
    double recovery_deg = 0.0;
    double reproduction_deg = 0.0;
};

struct EstimatorReport {
    EstimatorSpec spec;
    std::vector<ImageOutcome> outcomes;  // corpus order
    ErrorStats stats;                    // over recovery errors of successful outcomes
    long n_failed = 0;
};

struct BenchReport {
    std::vector<EstimatorReport> estimators;
};

struct SweepCell {
    Method method = Method::grey_edge_1;
    PoolingSpec pooling;
    double sigma = 0.0;
    double k_surround = 0.0;
    bool has_k = false;
    ErrorStats stats;
    long n_failed = 0;
    std::vector<double> errors_deg;  // per-image recovery errors, corpus order
};

struct SweepReport {
    std::vector<SweepCell> cells;  // grid order: method, sigma, k, pooling
};

/// Evaluates every estimator on every corpus image. Estimation failures
/// (degenerate feature maps) are recorded per image, counted, and excluded
/// from the statistics; an unreadable manifest or image aborts the run with
/// the offending path. The result is deterministic for a fixed config at any
/// parallelism level. When cfg.output_path is set the CSV is also written
/// there.
BenchReport run_bench(const RunConfig& cfg);

/// Full Cartesian sweep over the grid. Feature maps are built once per
/// (image, method, sigma, k) and pooled under every operator.
SweepReport run_sweep(const RunConfig& cfg, const SweepGrid& grid);

/// CSV renderings. Bench: a detail table (one row per image x estimator)
/// followed by a summary table. Sweep: one row per grid cell, followed by
/// best/worst-over-k rows per (method, pooling, sigma) when k was swept.
std::string bench_csv(const BenchReport& report);
std::string sweep_csv(const SweepReport& report);

}  // namespace cvp
