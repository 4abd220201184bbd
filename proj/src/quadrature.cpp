#include "heatforms/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace heatforms {

GaussLegendre::GaussLegendre(int order) {
    if (order < 1) throw std::invalid_argument("GaussLegendre: order must be >= 1");
    nodes.resize(order);
    weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (order == 1) { p1 = x; }
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = (order == 1) ? x : p1;
            double pm = (order == 1) ? 1.0 : p0;
            pp = order * (x * pn - pm) / (x * x - 1.0);
            double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[order - 1 - i] = weights[i];
    }
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int order) {
    static thread_local int cached_order = -1;
    static thread_local GaussLegendre* cached = nullptr;
    if (order != cached_order) {
        delete cached;
        cached = new GaussLegendre(order);
        cached_order = order;
    }
    const GaussLegendre& gl = *cached;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (int i = 0; i < order; ++i) s += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return s * half;
}

double gl_integrate_composite(const std::function<double(double)>& f, double a, double b,
                              int order, int panels) {
    double s = 0, w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) s += gl_integrate(f, a + p * w, a + (p + 1) * w, order);
    return s;
}

std::pair<std::vector<double>, std::vector<double>> gl_nodes_on(double a, double b, int order) {
    GaussLegendre gl(order);
    std::vector<double> xs(order), ws(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
        xs[i] = mid + half * gl.nodes[i];
        ws[i] = half * gl.weights[i];
    }
    return {xs, ws};
}

} // namespace heatforms
