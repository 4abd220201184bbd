#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatforms {

// Maximum spatial dimension handled by the library (desk scale: 1..3).
inline constexpr int kMaxDim = 3;

using MultiIndex = std::vector<int>; // nonnegative per-axis derivative orders

inline int order_of(const MultiIndex& g) {
    int s = 0;
    for (int v : g) {
        if (v < 0) throw std::invalid_argument("multi-index entries must be >= 0");
        s += v;
    }
    return s;
}

/// Axis-aligned box with a uniform node grid, optionally periodic.
/// Periodic axes have nodes lo + i*h, i = 0..N-1 with h = (hi-lo)/N
/// (hi is the wrap image of lo). Non-periodic axes include both ends:
/// h = (hi-lo)/(N-1).
struct GridBox {
    int n = 1;
    std::vector<double> lo, hi;
    std::vector<int> npts;
    bool periodic = false;

    GridBox() = default;
    GridBox(int dim, std::vector<double> lo_, std::vector<double> hi_,
            std::vector<int> npts_, bool periodic_);

    double spacing(int axis) const;
    double length(int axis) const { return hi[axis] - lo[axis]; }
    std::size_t size() const;
    double cell_volume() const;

    std::vector<double> point(std::size_t flat) const;
    std::size_t flat_index(const std::vector<int>& idx) const;
    std::vector<int> unflatten(std::size_t flat) const;

    // Euclidean distance in chart coordinates; minimum over wrap images
    // when periodic.
    double distance(const std::vector<double>& a, const std::vector<double>& b) const;

    // Distance from x to the box boundary (infinity-like cap for periodic).
    double boundary_distance(const std::vector<double>& x) const;

    bool same_layout(const GridBox& o) const;
};

/// Scalar field sampled on a GridBox.
struct GridFunction {
    GridBox box;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(GridBox b, double fill = 0.0)
        : box(std::move(b)), values(box.size(), fill) {}
    GridFunction(GridBox b, std::function<double(const std::vector<double>&)> f);

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double s);

    double max_abs() const;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

/// Central finite difference of `f` along `axis`, `order` in {1,2}.
/// Interior stencils are 4th-order accurate; non-periodic boundaries fall
/// back to one-sided 2nd-order stencils.
GridFunction finite_difference(const GridFunction& f, int axis, int order);

/// Mixed partial ∂^gamma by composing single-axis differences.
GridFunction finite_difference(const GridFunction& f, const MultiIndex& gamma);

/// Flat indices of grid nodes within chart-Euclidean distance R of x
/// (periodic aware). Scans only the bounding sub-box.
std::vector<std::size_t> points_in_ball(const GridBox& box, const std::vector<double>& x,
                                        double R);

/// Σ_i f_i g_i w(i) with w the cell volume (plain grid quadrature).
double grid_integral(const GridFunction& f);

/// Discrete L^r norm over the grid; weight field optional; r = INFINITY
/// returns the max modulus (weight ignored).
double lr_norm(const GridFunction& f, double r, const GridFunction* weight = nullptr);

} // namespace heatforms
