#pragma once

#include <array>
#include <optional>
#include <string>

#include "cvp/contrast.hpp"
#include "cvp/filters.hpp"
#include "cvp/types.hpp"

namespace cvp {

/// Tagged choice of pooling operator.
struct PoolingSpec {
    enum class Kind { max, minkowski, top_x, cvp };

    Kind kind = Kind::max;
    double p = 1.0;        // minkowski only, >= 1
    double x = 100.0;      // top_x only, percent in (0, 100]
    bool binned = false;   // top_x only: 256-bin histogram mode
    CvpConfig cvp_cfg;     // cvp only

    static PoolingSpec make_max() { return {}; }
    static PoolingSpec make_minkowski(double p);
    static PoolingSpec make_top_x(double x, bool binned = false);
    static PoolingSpec make_cvp(const CvpConfig& cfg = {});

    void validate() const;  // throws ConfigError

    /// Canonical display form: "max", "minkowski(4)", "top_x(1)",
    /// "top_x_binned(1)", "cvp". Used in CSV output and CLI messages.
    std::string label() const;
};

/// Outcome of pooling one tri-channel map.
struct PoolResult {
    std::array<double, 3> value{};            // pooled value per channel
    std::array<double, 3> threshold{};        // smallest pooled value (selection kinds)
    std::array<long, 3> pooled_count{};       // pixels actually averaged (selection kinds)
    std::array<double, 3> x_percent{};        // percentage used (top_x/cvp)
    bool has_selection = false;               // threshold/pooled_count/x_percent meaningful
};

/// Per-channel maximum over valid pixels. Throws DataError when no pixel is
/// valid.
PoolResult pool_max(const FeatureMap& map);

/// Mean-normalized power mean ((1/N) sum v^p)^(1/p) over valid pixels.
/// p=1 is the plain mean (Grey-World); large p approaches the maximum.
/// Throws ConfigError for p < 1, DataError for an empty valid set.
PoolResult pool_minkowski(const FeatureMap& map, double p);

/// Mean of the largest x% valid values per channel, by exact selection:
/// N = clamp(round(x/100 * P_valid), 1, P_valid); values tied with the
/// N-th largest are all pooled and the true count reported. The reported
/// threshold is the smallest pooled value. The binned variant quantizes
/// values into 256 equal-width bins over [0, channel max] and pools whole
/// bins from the top until the target count is covered.
PoolResult pool_top_x(const FeatureMap& map, const std::array<double, 3>& x_percent,
                      bool binned = false);
PoolResult pool_top_x(const FeatureMap& map, double x_percent, bool binned = false);

/// Contrast-variant pooling over a self-contained map: x_c from
/// cvp_percentage(local_contrast(map)), then top-x selection with those
/// per-channel percentages. Estimators measure the percentages on the source
/// image instead and apply them to whatever feature map the method derives
/// (see selection_percentages in algorithms.hpp); the two coincide when the
/// map is the image itself.
PoolResult pool_cvp(const FeatureMap& map, const CvpConfig& cfg);

/// Dispatch on spec.kind.
PoolResult pool(const FeatureMap& map, const PoolingSpec& spec);

}  // namespace cvp
