#pragma once

#include <vector>

namespace heatforms {

struct ExponentFit {
    double slope = 0;
    double intercept = 0; // of log(value) against log(t)
    double residual = 0;  // RMS residual in log space
};

/// Least squares of log(value) on log(t). Requires >= 6 points spanning at
/// least one decade and strictly positive values.
ExponentFit exponent_fit(const std::vector<double>& t, const std::vector<double>& values);

} // namespace heatforms
