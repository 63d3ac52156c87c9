#include "cvp/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace cvp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadToDeg = 180.0 / kPi;

// Angle via atan2(|a x b|, a.b) rather than acos of the normalized dot
// product: the cross product of (anti)parallel vectors cancels exactly, so
// identical directions give 0 and opposite ones 180 with no rounding cliff,
// and small angles keep full relative precision.
double angle_deg(const Illuminant& a, const Illuminant& b) {
    const double cx = a.g * b.b - a.b * b.g;
    const double cy = a.b * b.r - a.r * b.b;
    const double cz = a.r * b.g - a.g * b.r;
    const double sin_part = std::sqrt(cx * cx + cy * cy + cz * cz);
    return std::atan2(sin_part, a.dot(b)) * kRadToDeg;
}

// Inclusive linear interpolation of order statistics: position 1 + (n-1)q
// (1-based), fractional positions interpolated between neighbors.
double quantile(const std::vector<double>& sorted, double q) {
    const size_t n = sorted.size();
    const double pos = (static_cast<double>(n) - 1.0) * q;
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double recovery_error_deg(const Illuminant& estimated, const Illuminant& truth) {
    const double ne = estimated.norm(), nt = truth.norm();
    if (!(ne > 0.0) || !(nt > 0.0) || !std::isfinite(ne) || !std::isfinite(nt))
        throw DataError("recovery error requires non-zero illuminants");
    return angle_deg(estimated, truth);
}

double reproduction_error_deg(const Illuminant& estimated, const Illuminant& truth) {
    if (!(estimated.r > 0.0 && estimated.g > 0.0 && estimated.b > 0.0))
        throw DataError("reproduction error requires a strictly positive estimate");
    const Illuminant w{truth.r / estimated.r, truth.g / estimated.g, truth.b / estimated.b};
    const double nw = w.norm();
    if (!(nw > 0.0) || !std::isfinite(nw))
        throw DataError("reproduction error: degenerate channel ratio");
    return angle_deg(w, Illuminant{1.0, 1.0, 1.0});
}

ErrorStats summarize(const std::vector<double>& errors_deg) {
    if (errors_deg.empty()) throw DataError("cannot summarize an empty error list");
    std::vector<double> sorted = errors_deg;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();

    ErrorStats st;
    st.n = static_cast<long>(n);

    double sum = 0.0;
    for (double v : sorted) sum += v;
    st.mean = sum / static_cast<double>(n);

    st.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const double q1 = quantile(sorted, 0.25);
    const double q2 = quantile(sorted, 0.5);
    const double q3 = quantile(sorted, 0.75);
    st.trimean = (q1 + 2.0 * q2 + q3) / 4.0;

    const size_t k = (n + 3) / 4;  // ceil(n/4)
    double best = 0.0, worst = 0.0;
    for (size_t i = 0; i < k; ++i) {
        best += sorted[i];
        worst += sorted[n - 1 - i];
    }
    st.best25_mean = best / static_cast<double>(k);
    st.worst25_mean = worst / static_cast<double>(k);
    return st;
}

}  // namespace cvp
