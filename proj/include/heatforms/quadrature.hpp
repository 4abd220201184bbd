#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace heatforms {

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence (deterministic, any order >= 1).
struct GaussLegendre {
    std::vector<double> nodes, weights;
    explicit GaussLegendre(int order);
};

/// ∫_a^b f, single Gauss–Legendre panel of the given order.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int order);

/// ∫_a^b f with `panels` equal subintervals, Gauss–Legendre of `order` each.
double gl_integrate_composite(const std::function<double(double)>& f, double a, double b,
                              int order, int panels);

/// Interior quadrature nodes/weights for ∫_0^t (open rule: no endpoint hits).
std::pair<std::vector<double>, std::vector<double>> gl_nodes_on(double a, double b, int order);

} // namespace heatforms
