#include "heatforms/fitting.hpp"

#include <cmath>
#include <stdexcept>

namespace heatforms {

ExponentFit exponent_fit(const std::vector<double>& t, const std::vector<double>& values) {
    if (t.size() != values.size()) throw std::invalid_argument("exponent_fit: size mismatch");
    if (t.size() < 6) throw std::invalid_argument("exponent_fit: need at least 6 points");
    double tmin = t[0], tmax = t[0];
    for (double ti : t) {
        if (!(ti > 0)) throw std::invalid_argument("exponent_fit: t must be positive");
        tmin = std::min(tmin, ti);
        tmax = std::max(tmax, ti);
    }
    if (tmax / tmin < 10.0) throw std::invalid_argument("exponent_fit: t grid must span a decade");
    for (double v : values)
        if (!(v > 0)) throw std::invalid_argument("exponent_fit: values must be positive");

    const std::size_t m = t.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::log(t[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    ExponentFit fit;
    double denom = m * sxx - sx * sx;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double e = std::log(values[i]) - (fit.intercept + fit.slope * std::log(t[i]));
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / m);
    return fit;
}

} // namespace heatforms
