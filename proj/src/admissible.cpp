#include "heatforms/admissible.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace heatforms {

MetricSampleCache::MetricSampleCache(const ChartMetric& metric, int m)
    : metric_(&metric), m_(m) {
    if (m < 0) throw std::invalid_argument("MetricSampleCache: m must be >= 0");
    const GridBox& box = metric.domain();
    std::size_t npts = box.size();
    eigen_dev_.resize(npts);
    dsup_.assign(m, std::vector<double>(npts, 0.0));
    for (std::size_t p = 0; p < npts; ++p) {
        auto x = box.point(p);
        auto [lmin, lmax] = metric.eigen_range(x);
        eigen_dev_[p] = std::max(lmax - 1.0, 1.0 - lmin);
        for (int d = 1; d <= m; ++d) dsup_[d - 1][p] = metric.derivative_sup(x, d);
    }
}

namespace {

void require_ball_inside(const GridBox& box, const std::vector<double>& x, double R) {
    if (box.periodic) {
        double min_len = box.length(0);
        for (int a = 1; a < box.n; ++a) min_len = std::min(min_len, box.length(a));
        if (R >= 0.5 * min_len)
            throw BallExitsChart("ball radius exceeds half the period of the chart");
        return;
    }
    if (box.boundary_distance(x) < R)
        throw BallExitsChart("ball exits the chart domain");
}

} // namespace

AdmissibilityReport is_admissible(const MetricSampleCache& cache, const std::vector<double>& x,
                                  double R, double epsilon) {
    if (!(R > 0)) throw std::invalid_argument("is_admissible: radius must be positive");
    if (!(epsilon > 0 && epsilon < 1))
        throw std::invalid_argument("is_admissible: epsilon must lie in (0,1)");
    const GridBox& box = cache.metric().domain();
    require_ball_inside(box, x, R);

    auto pts = points_in_ball(box, x, R);
    AdmissibilityReport rep;
    rep.samples = pts.size();
    double worst_dev = 0;
    std::vector<double> worst_d(cache.order(), 0.0);
    for (std::size_t p : pts) {
        worst_dev = std::max(worst_dev, cache.eigen_deviation(p));
        for (int d = 1; d <= cache.order(); ++d)
            worst_d[d - 1] = std::max(worst_d[d - 1], cache.derivative_sup(p, d));
    }
    rep.eigen_margin = epsilon - worst_dev;
    double weighted = 0;
    for (int d = 1; d <= cache.order(); ++d) weighted += std::pow(R, d) * worst_d[d - 1];
    rep.derivative_margin = epsilon - weighted;
    rep.admissible = rep.eigen_margin >= 0 && rep.derivative_margin >= 0;
    return rep;
}

AdmissibilityReport is_admissible(const ChartMetric& metric, const std::vector<double>& x,
                                  double R, int m, double epsilon) {
    MetricSampleCache cache(metric, m);
    return is_admissible(cache, x, R, epsilon);
}

RadiusResult admissible_radius(const MetricSampleCache& cache, const std::vector<double>& x,
                               double epsilon, double tol) {
    const GridBox& box = cache.metric().domain();
    double hi = kRadiusCap;
    if (!box.periodic) {
        hi = std::min(hi, box.boundary_distance(x));
    } else {
        double min_len = box.length(0);
        for (int a = 1; a < box.n; ++a) min_len = std::min(min_len, box.length(a));
        hi = std::min(hi, 0.499 * min_len);
    }

    RadiusResult res;
    if (hi <= tol || !is_admissible(cache, x, std::min(tol, hi), epsilon).admissible) {
        res.r_prime = tol;
        res.r_eps = std::min(1.0, tol / 2);
        res.degenerate = true;
        return res;
    }
    if (is_admissible(cache, x, hi, epsilon).admissible) {
        res.r_prime = hi;
        res.r_eps = std::min(1.0, hi / 2);
        return res;
    }
    double lo = tol;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (is_admissible(cache, x, mid, epsilon).admissible) lo = mid;
        else hi = mid;
    }
    res.r_prime = lo;
    res.r_eps = std::min(1.0, lo / 2);
    return res;
}

RadiusResult admissible_radius(const ChartMetric& metric, const std::vector<double>& x, int m,
                               double epsilon, double tol) {
    MetricSampleCache cache(metric, m);
    return admissible_radius(cache, x, epsilon, tol);
}

double RadiusField::min_r_eps() const {
    double m = 0;
    bool any = false;
    for (std::size_t i = 0; i < r_eps.size(); ++i) {
        if (degenerate[i]) continue;
        m = any ? std::min(m, r_eps[i]) : r_eps[i];
        any = true;
    }
    return any ? m : 0.0;
}

std::size_t RadiusField::degenerate_count() const {
    std::size_t c = 0;
    for (bool d : degenerate) c += d;
    return c;
}

RadiusField compute_radius_field(const ChartMetric& metric, int m, double epsilon, double tol) {
    MetricSampleCache cache(metric, m);
    const GridBox& box = metric.domain();
    RadiusField field;
    field.box = box;
    field.m = m;
    field.epsilon = epsilon;
    field.tol = tol;
    std::size_t npts = box.size();
    field.r_prime.resize(npts);
    field.r_eps.resize(npts);
    field.degenerate.assign(npts, false);
    for (std::size_t p = 0; p < npts; ++p) {
        auto x = box.point(p);
        if (!box.periodic && box.boundary_distance(x) <= tol) {
            field.r_prime[p] = tol;
            field.r_eps[p] = tol / 2;
            field.degenerate[p] = true;
            continue;
        }
        RadiusResult r = admissible_radius(cache, x, epsilon, tol);
        field.r_prime[p] = r.r_prime;
        field.r_eps[p] = r.r_eps;
        field.degenerate[p] = r.degenerate;
    }
    return field;
}

GridGeodesics::GridGeodesics(const ChartMetric& metric) : box_(metric.domain()) {
    std::size_t npts = box_.size();
    adjacency_.resize(npts);

    // Moore-neighborhood offsets
    std::vector<std::vector<int>> offsets;
    std::vector<int> off(box_.n, -1);
    for (;;) {
        bool all_zero = std::all_of(off.begin(), off.end(), [](int v) { return v == 0; });
        if (!all_zero) offsets.push_back(off);
        int a = box_.n - 1;
        while (a >= 0 && ++off[a] == 2) off[a--] = -1;
        if (a < 0) break;
    }

    for (std::size_t p = 0; p < npts; ++p) {
        auto idx = box_.unflatten(p);
        auto xp = box_.point(p);
        for (const auto& d : offsets) {
            std::vector<int> q(box_.n);
            bool ok = true;
            for (int a = 0; a < box_.n; ++a) {
                int ia = idx[a] + d[a];
                if (box_.periodic) ia = ((ia % box_.npts[a]) + box_.npts[a]) % box_.npts[a];
                else if (ia < 0 || ia >= box_.npts[a]) { ok = false; break; }
                q[a] = ia;
            }
            if (!ok) continue;
            std::size_t pq = box_.flat_index(q);
            if (pq <= p) continue;
            // Riemannian length of the straight edge, midpoint rule
            std::vector<double> dx(box_.n), mid(box_.n);
            for (int a = 0; a < box_.n; ++a) {
                dx[a] = d[a] * box_.spacing(a);
                mid[a] = xp[a] + 0.5 * dx[a];
                if (box_.periodic) {
                    double L = box_.length(a);
                    mid[a] = box_.lo[a] + std::fmod(std::fmod(mid[a] - box_.lo[a], L) + L, L);
                }
            }
            Eigen::MatrixXd g = metric.matrix(mid);
            double s = 0;
            for (int a = 0; a < box_.n; ++a)
                for (int b = 0; b < box_.n; ++b) s += g(a, b) * dx[a] * dx[b];
            double w = std::sqrt(std::max(s, 0.0));
            adjacency_[p].push_back({pq, w});
            adjacency_[pq].push_back({p, w});
        }
    }
}

const std::vector<double>& GridGeodesics::distances_from(std::size_t source) const {
    auto it = cache_.find(source);
    if (it != cache_.end()) return it->second;

    std::vector<double> dist(adjacency_.size(), std::numeric_limits<double>::infinity());
    using QE = std::pair<double, std::size_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    dist[source] = 0;
    pq.push({0.0, source});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto [v, w] : adjacency_[u]) {
            double nd = d + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                pq.push({nd, v});
            }
        }
    }
    return cache_.emplace(source, std::move(dist)).first->second;
}

double GridGeodesics::distance(std::size_t a, std::size_t b) const {
    return distances_from(a)[b];
}

RadiusFieldChecks check_radius_field(const RadiusField& field, const GridGeodesics& geo) {
    RadiusFieldChecks checks;
    double grid_step = 0;
    for (int a = 0; a < field.box.n; ++a) grid_step = std::max(grid_step, field.box.spacing(a));
    checks.slack = field.tol + grid_step;

    std::size_t npts = field.box.size();
    for (std::size_t x = 0; x < npts; ++x) {
        if (field.degenerate[x]) continue;
        const auto& dist = geo.distances_from(x);
        for (std::size_t y = x + 1; y < npts; ++y) {
            if (field.degenerate[y]) continue;
            double excess = std::abs(field.r_prime[x] - field.r_prime[y]) - dist[y];
            checks.lipschitz_excess = std::max(checks.lipschitz_excess, excess);
        }
        double Rx = field.r_eps[x];
        for (std::size_t y = 0; y < npts; ++y) {
            if (field.degenerate[y] || dist[y] > Rx) continue;
            double Ry = field.r_eps[y];
            checks.slow_variation_low_excess =
                std::max(checks.slow_variation_low_excess, Rx / 2 - Ry);
            checks.slow_variation_high_excess =
                std::max(checks.slow_variation_high_excess, Ry - 2 * Rx);
        }
    }
    checks.lipschitz_pass = checks.lipschitz_excess <= checks.slack;
    checks.slow_variation_pass = checks.slow_variation_low_excess <= checks.slack &&
                                 checks.slow_variation_high_excess <= checks.slack;
    return checks;
}

} // namespace heatforms
