#pragma once

#include <vector>

#include "cvp/types.hpp"

namespace cvp {

/// Summary of a set of per-image angular errors, in degrees.
struct ErrorStats {
    long n = 0;
    double mean = 0.0;
    double median = 0.0;
    double trimean = 0.0;
    double best25_mean = 0.0;   // mean of the lowest ceil(n/4) errors
    double worst25_mean = 0.0;  // mean of the highest ceil(n/4) errors
};

/// Angle between the two illuminant directions, in degrees. Symmetric;
/// invariant to positive scaling of either argument. Throws DataError on a
/// zero-norm input.
double recovery_error_deg(const Illuminant& estimated, const Illuminant& truth);

/// Angle between the componentwise ratio truth/estimated and the neutral
/// grey axis, in degrees. Zero whenever the estimate matches the true
/// illuminant up to a scalar. Throws DataError when `estimated` has a
/// non-positive component.
double reproduction_error_deg(const Illuminant& estimated, const Illuminant& truth);

/// Median, trimean, mean and tail means of a non-empty error list.
/// Quartiles use inclusive linear interpolation of the order statistics
/// (position 1 + (n-1)q); trimean = (Q1 + 2*Q2 + Q3)/4.
ErrorStats summarize(const std::vector<double>& errors_deg);

}  // namespace cvp
