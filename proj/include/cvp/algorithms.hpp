#pragma once

#include <array>
#include <optional>
#include <string>

#include "cvp/pooling.hpp"
#include "cvp/types.hpp"

namespace cvp {

enum class Method { white_patch, grey_world, grey_edge_1, grey_edge_2, double_opponency };

/// Parses "white_patch", "grey_world", "grey_edge_1", "grey_edge_2",
/// "double_opponency" (throws ConfigError otherwise); and the reverse.
Method parse_method(const std::string& name);
std::string method_name(Method m);

/// A fully specified estimator: which algorithm, its filter parameters, and
/// the pooling operator applied to its feature map.
struct EstimatorSpec {
    Method method = Method::white_patch;
    double sigma = 2.0;       // edge / double-opponency methods
    double k_surround = 0.5;  // double-opponency only, in [0,1]
    PoolingSpec pooling;

    /// Rejects contradictory combinations (grey_world with a non-mean
    /// pooling operator, sigma on methods that take none, ...).
    void validate() const;
};

/// Outcome of one estimation, carrying the pooling diagnostics for reporting.
struct EstimateResult {
    Illuminant illuminant;  // unit norm
    PoolResult pool;
};

// Individual estimators. All return a unit-norm illuminant and throw
// DataError on degenerate inputs (no valid pixels, all-zero feature map).
Illuminant white_patch(const Image& img, const PoolingSpec& pooling);
Illuminant grey_world(const Image& img);
Illuminant grey_edge(const Image& img, int order, double sigma, const PoolingSpec& pooling);
Illuminant double_opponency(const Image& img, double sigma, double k_surround,
                            const PoolingSpec& pooling);

/// Builds the feature map an estimator pools: intensities (white_patch,
/// grey_world), gradient magnitude (grey_edge_*), or rectified opponent
/// center-surround response (double_opponency). Exposed separately so sweeps
/// can pool one map under several operators.
FeatureMap estimator_feature_map(const Image& img, const EstimatorSpec& spec);

/// Per-channel percentage of feature-map pixels an estimator pools under
/// contrast-variant pooling, derived from the *input image's* local contrast
/// (mean inverse contrast, clamped to cfg's range). The percentage is a
/// property of the scene alone — smooth scenes pool few pixels, busy ones
/// pool many — so one computation serves every method, sigma and k.
std::array<double, 3> selection_percentages(const Image& img, const CvpConfig& cfg);

/// Pools a prebuilt feature map per spec and normalizes. Contrast-variant
/// pooling selects by percentages measured on the source image, not on the
/// derived map, so those must be supplied (from selection_percentages);
/// passing none with a cvp pooling is a ConfigError, and percentages given
/// with any other pooling kind are ignored. Throws DataError when the map is
/// degenerate (no valid pixel, or all-zero pooled vector).
EstimateResult estimate_from_map(
    const FeatureMap& map, const EstimatorSpec& spec,
    const std::optional<std::array<double, 3>>& selection_x = std::nullopt);

/// estimator_feature_map + estimate_from_map in one step, computing the
/// selection percentages from the image when the pooling calls for them.
EstimateResult estimate(const Image& img, const EstimatorSpec& spec);

/// von Kries diagonal correction: out_c = in_c * (1/sqrt(3)) / e_c. Values
/// may exceed 1; they are clamped only when saved. Throws DataError when any
/// component of e is not strictly positive.
Image correct_image(const Image& img, const Illuminant& e);

}  // namespace cvp
