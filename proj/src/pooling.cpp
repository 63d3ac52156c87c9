#include "cvp/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace cvp {

namespace {

// Compensated (Kahan) summation keeps pooled means reproducible to ~1 ulp
// regardless of how many values enter the sum.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

std::string format_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<double> valid_values(const FeatureMap& map, int c) {
    std::vector<double> vals;
    vals.reserve(map.pixel_count());
    const Raster& ch = map.channels[c];
    for (size_t i = 0; i < ch.v.size(); ++i)
        if (map.valid[i] != 0) vals.push_back(ch.v[i]);
    if (vals.empty()) throw DataError("pooling requires at least one valid pixel per channel");
    return vals;
}

}  // namespace

PoolingSpec PoolingSpec::make_minkowski(double p) {
    PoolingSpec s;
    s.kind = Kind::minkowski;
    s.p = p;
    s.validate();
    return s;
}

PoolingSpec PoolingSpec::make_top_x(double x, bool binned) {
    PoolingSpec s;
    s.kind = Kind::top_x;
    s.x = x;
    s.binned = binned;
    s.validate();
    return s;
}

PoolingSpec PoolingSpec::make_cvp(const CvpConfig& cfg) {
    PoolingSpec s;
    s.kind = Kind::cvp;
    s.cvp_cfg = cfg;
    s.validate();
    return s;
}

void PoolingSpec::validate() const {
    switch (kind) {
        case Kind::max:
            break;
        case Kind::minkowski:
            if (!(p >= 1.0) || !std::isfinite(p))
                throw ConfigError("minkowski pooling requires finite p >= 1");
            break;
        case Kind::top_x:
            if (!(x > 0.0 && x <= 100.0))
                throw ConfigError("top_x pooling requires x in (0, 100]");
            break;
        case Kind::cvp:
            cvp_cfg.validate();
            break;
    }
}

std::string PoolingSpec::label() const {
    switch (kind) {
        case Kind::max:
            return "max";
        case Kind::minkowski:
            return "minkowski(" + format_number(p) + ")";
        case Kind::top_x:
            return (binned ? "top_x_binned(" : "top_x(") + format_number(x) + ")";
        case Kind::cvp:
            return "cvp";
    }
    return "?";
}

PoolResult pool_max(const FeatureMap& map) {
    PoolResult r;
    for (int c = 0; c < 3; ++c) {
        const Raster& ch = map.channels[c];
        bool seen = false;
        double best = 0.0;
        for (size_t i = 0; i < ch.v.size(); ++i) {
            if (map.valid[i] == 0) continue;
            if (!seen || ch.v[i] > best) best = ch.v[i];
            seen = true;
        }
        if (!seen) throw DataError("pooling requires at least one valid pixel per channel");
        r.value[c] = best;
    }
    return r;
}

PoolResult pool_minkowski(const FeatureMap& map, double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw ConfigError("minkowski pooling requires finite p >= 1");
    PoolResult r;
    for (int c = 0; c < 3; ++c) {
        const std::vector<double> vals = valid_values(map, c);
        const size_t n = vals.size();
        if (p == 1.0) {
            KahanSum s;
            for (double v : vals) s.add(v);
            r.value[c] = s.s / n;
            continue;
        }
        // Factored power mean: m * ((1/N) sum (v/m)^p)^(1/p). Dividing by the
        // maximum first keeps v^p from underflowing for large p.
        double m = 0.0;
        for (double v : vals) m = std::max(m, v);
        if (m == 0.0) {
            r.value[c] = 0.0;
            continue;
        }
        KahanSum s;
        for (double v : vals) s.add(std::pow(v / m, p));
        r.value[c] = m * std::pow(s.s / n, 1.0 / p);
    }
    return r;
}

namespace {

// Exact selection for one channel: mean of the N largest values where
// N = clamp(round(x/100 * P), 1, P), extended to every value tied with the
// N-th largest.
void top_x_exact(std::vector<double>& vals, double x, double& value, double& threshold,
                 long& count) {
    const size_t P = vals.size();
    size_t n = static_cast<size_t>(
        std::clamp<long long>(std::llround(x / 100.0 * static_cast<double>(P)), 1,
                              static_cast<long long>(P)));
    std::sort(vals.begin(), vals.end(), std::greater<>());
    const double t = vals[n - 1];
    while (n < P && vals[n] == t) ++n;  // pool the whole tie group
    threshold = t;
    count = static_cast<long>(n);
    if (vals[0] == t) {
        value = t;  // all pooled values equal; mean is exact
        return;
    }
    KahanSum s;
    for (size_t i = 0; i < n; ++i) s.add(vals[i]);
    value = s.s / static_cast<double>(n);
}

// Histogram variant: 256 equal-width bins over [0, channel max]; whole bins
// are pooled from the top until the target count is covered.
void top_x_binned(const std::vector<double>& vals, double x, double& value, double& threshold,
                  long& count) {
    const size_t P = vals.size();
    const long long target =
        std::clamp<long long>(std::llround(x / 100.0 * static_cast<double>(P)), 1,
                              static_cast<long long>(P));
    double m = 0.0;
    for (double v : vals) m = std::max(m, v);
    if (m == 0.0) {
        value = 0.0;
        threshold = 0.0;
        count = static_cast<long>(P);
        return;
    }
    constexpr int kBins = 256;
    std::array<long, kBins> bin_count{};
    std::array<double, kBins> bin_sum{};
    std::array<double, kBins> bin_min{};
    bin_min.fill(std::numeric_limits<double>::infinity());
    for (double v : vals) {
        int b = static_cast<int>(v / m * kBins);
        if (b > kBins - 1) b = kBins - 1;  // v == m lands here
        if (b < 0) b = 0;
        ++bin_count[b];
        bin_sum[b] += v;
        bin_min[b] = std::min(bin_min[b], v);
    }
    long long covered = 0;
    double sum = 0.0;
    double smallest = m;
    for (int b = kBins - 1; b >= 0; --b) {
        if (bin_count[b] == 0) continue;
        covered += bin_count[b];
        sum += bin_sum[b];
        smallest = bin_min[b];
        if (covered >= target) break;
    }
    value = sum / static_cast<double>(covered);
    threshold = smallest;
    count = static_cast<long>(covered);
}

}  // namespace

PoolResult pool_top_x(const FeatureMap& map, const std::array<double, 3>& x_percent,
                      bool binned) {
    PoolResult r;
    r.has_selection = true;
    for (int c = 0; c < 3; ++c) {
        const double x = x_percent[c];
        if (!(x > 0.0 && x <= 100.0)) throw ConfigError("top_x pooling requires x in (0, 100]");
        std::vector<double> vals = valid_values(map, c);
        if (binned)
            top_x_binned(vals, x, r.value[c], r.threshold[c], r.pooled_count[c]);
        else
            top_x_exact(vals, x, r.value[c], r.threshold[c], r.pooled_count[c]);
        r.x_percent[c] = x;
    }
    return r;
}

PoolResult pool_top_x(const FeatureMap& map, double x_percent, bool binned) {
    return pool_top_x(map, std::array<double, 3>{x_percent, x_percent, x_percent}, binned);
}

PoolResult pool_cvp(const FeatureMap& map, const CvpConfig& cfg) {
    const ContrastMap cmap = local_contrast(map, cfg.sigma);
    const std::array<double, 3> x = cvp_percentage(cmap, cfg);
    return pool_top_x(map, x, false);
}

PoolResult pool(const FeatureMap& map, const PoolingSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case PoolingSpec::Kind::max:
            return pool_max(map);
        case PoolingSpec::Kind::minkowski:
            return pool_minkowski(map, spec.p);
        case PoolingSpec::Kind::top_x:
            return pool_top_x(map, spec.x, spec.binned);
        case PoolingSpec::Kind::cvp:
            return pool_cvp(map, spec.cvp_cfg);
    }
    throw ConfigError("unknown pooling kind");
}

}  // namespace cvp
