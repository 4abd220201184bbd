#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Physicists' Hermite polynomial H_m by recurrence.
inline double hermite(int m, double xi) {
    double h0 = 1.0, h1 = 2.0 * xi;
    if (m == 0) return h0;
    if (m == 1) return h1;
    for (int k = 2; k <= m; ++k) {
        double h2 = 2.0 * xi * h1 - 2.0 * (k - 1) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

// ∂^γ of the Gaussian heat kernel via the Hermite representation:
// ∂^m_y e^{-a y²} = (-1)^m a^{m/2} H_m(√a y) e^{-a y²}, a = 1/(4t).
inline double gaussian_derivative(int n, double t, const std::vector<double>& x,
                                  const std::vector<int>& gamma) {
    if (t <= 0) return 0;
    double a = 1.0 / (4.0 * t);
    double v = std::pow(4.0 * M_PI * t, -0.5 * n);
    for (int i = 0; i < n; ++i) {
        double sign = (gamma[i] % 2 == 0) ? 1.0 : -1.0;
        v *= sign * std::pow(a, gamma[i] / 2.0) * hermite(gamma[i], std::sqrt(a) * x[i]) *
             std::exp(-a * x[i] * x[i]);
    }
    return v;
}

// ∫ |y|^p e^{-q y²} dy over the real line (p > -1, q > 0).
inline double gaussian_moment(double p, double q) {
    return std::tgamma((p + 1) / 2) * std::pow(q, -(p + 1) / 2);
}

// Adaptive-free Simpson rule on a fine uniform grid (test-side quadrature).
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    if (intervals % 2) ++intervals;
    double h = (b - a) / intervals, s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace oracles
