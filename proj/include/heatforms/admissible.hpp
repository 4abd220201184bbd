#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "heatforms/chart_metric.hpp"
#include "heatforms/grid.hpp"

namespace heatforms {

/// Ball candidate for the (m,ε)-admissibility conditions: (1) eigenvalues of
/// g within [1-ε, 1+ε] on the ball, (2) Σ_{1<=|β|<=m} R^{|β|} sup |∂^β g| <= ε.
struct AdmissibleBall {
    std::vector<double> center;
    double radius = 0; // in (0, 1]
    int order_m = 0;
    double epsilon = 0.1;

    /// chart-image radius (1-ε)R used where the paper writes R_φ ≃ R
    double chart_image_radius() const { return (1 - epsilon) * radius; }
};

struct BallExitsChart : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-grid-point quantities the admissibility conditions test: the eigenvalue
/// deviation of g from identity and the per-order derivative suprema.
/// Computing them once makes radius-field bisection cheap.
class MetricSampleCache {
public:
    MetricSampleCache(const ChartMetric& metric, int m);

    const ChartMetric& metric() const { return *metric_; }
    int order() const { return m_; }
    double eigen_deviation(std::size_t point) const { return eigen_dev_[point]; }
    double derivative_sup(std::size_t point, int d) const { return dsup_[d - 1][point]; }

private:
    const ChartMetric* metric_;
    int m_;
    std::vector<double> eigen_dev_;
    std::vector<std::vector<double>> dsup_;
};

struct AdmissibilityReport {
    bool admissible = false;
    double eigen_margin = 0;      // ε - worst eigenvalue deviation on the ball
    double derivative_margin = 0; // ε - weighted derivative sum (= ε when m = 0)
    std::size_t samples = 0;
};

/// Checks conditions (1) and (2) on the grid samples of B(x,R).
/// Throws BallExitsChart when the ball does not fit in the chart domain.
AdmissibilityReport is_admissible(const MetricSampleCache& cache, const std::vector<double>& x,
                                  double R, double epsilon);
AdmissibilityReport is_admissible(const ChartMetric& metric, const std::vector<double>& x,
                                  double R, int m, double epsilon);

struct RadiusResult {
    double r_prime = 0; // supremal admissible radius (capped at 2)
    double r_eps = 0;   // min(1, r_prime / 2)
    bool degenerate = false;
};

inline constexpr double kRadiusBisectionTol = 1e-4;
inline constexpr double kRadiusCap = 2.0; // R' above this cannot change R_ε

/// Bisection on R against is_admissible over (0, min(2, dist(x, ∂domain))),
/// then R_ε = min(1, R'/2). Degenerate points (nothing admissible above the
/// tolerance) are flagged, not failed.
RadiusResult admissible_radius(const MetricSampleCache& cache, const std::vector<double>& x,
                               double epsilon, double tol = kRadiusBisectionTol);
RadiusResult admissible_radius(const ChartMetric& metric, const std::vector<double>& x, int m,
                               double epsilon, double tol = kRadiusBisectionTol);

/// R'(x) and R_ε(x) over every grid node of the chart domain.
struct RadiusField {
    GridBox box;
    int m = 0;
    double epsilon = 0;
    double tol = kRadiusBisectionTol;
    std::vector<double> r_prime, r_eps;
    std::vector<bool> degenerate;

    double min_r_eps() const; // η over non-degenerate points; 0 if none
    std::size_t degenerate_count() const;
};

RadiusField compute_radius_field(const ChartMetric& metric, int m, double epsilon,
                                 double tol = kRadiusBisectionTol);

/// Grid-graph geodesic distances: Dijkstra over the Moore neighborhood with
/// Riemannian edge lengths from the chart metric.
class GridGeodesics {
public:
    explicit GridGeodesics(const ChartMetric& metric);

    const std::vector<double>& distances_from(std::size_t source) const;
    double distance(std::size_t a, std::size_t b) const;
    const GridBox& box() const { return box_; }

private:
    GridBox box_;
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
    mutable std::map<std::size_t, std::vector<double>> cache_;
};

struct RadiusFieldChecks {
    // max over pairs of |R'(x)-R'(y)| - d_g(x,y); passes when <= slack
    double lipschitz_excess = 0;
    // worst violations of R(x)/2 <= R(y) <= 2R(x) for y in B(x,R(x))
    double slow_variation_low_excess = 0;
    double slow_variation_high_excess = 0;
    double slack = 0;
    bool lipschitz_pass = false;
    bool slow_variation_pass = false;
};

/// Remark-after-Def-2.2 and Lemma-m7 checks, brute force over sampled pairs.
/// slack = bisection tolerance + grid step.
RadiusFieldChecks check_radius_field(const RadiusField& field, const GridGeodesics& geo);

} // namespace heatforms
