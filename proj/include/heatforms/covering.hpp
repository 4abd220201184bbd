#pragma once

#include <functional>
#include <string>
#include <vector>

#include "heatforms/admissible.hpp"
#include "heatforms/chart_metric.hpp"
#include "heatforms/form_field.hpp"

namespace heatforms {

struct Ball {
    std::vector<double> center;
    double radius = 0;
    long center_point = -1; // grid index when the ball came from a sample set
};

/// Distance between two candidate balls (by index into the candidate list).
using BallDistance = std::function<double(std::size_t, std::size_t)>;

/// Vitali output: the disjoint selected family plus verification results for
/// the classical guarantees (checked post hoc by brute force, never assumed).
struct VitaliSelection {
    std::vector<std::size_t> selected;       // indices into the candidate list
    std::vector<std::size_t> covered_by;     // per candidate, selected index it maps into
    double dilation = 5.0;
    bool disjoint_verified = false;
    bool cover_verified = false;
    double worst_cover_excess = 0; // max over candidates of d + r_B - dilation·r_C
};

/// Greedy selection by decreasing radius (the classical proof order, which
/// also makes the output deterministic). Radii must lie in (0, Rmax].
VitaliSelection vitali_select(const std::vector<Ball>& candidates, double Rmax,
                              const BallDistance& dist, double dilation = 5.0,
                              double slack = 0.0);

/// Euclidean specialization for plain ball lists.
VitaliSelection vitali_select(const std::vector<Ball>& candidates, double Rmax,
                              double dilation = 5.0, double slack = 0.0);

inline constexpr double kCoveringDivisor = 120.0; // r(x) = R_ε(x)/120
inline constexpr double kCoveringDilation = 5.0;
inline constexpr double kPatchDivisor = 10.0;     // Lemma-m8 patches B(x, R_ε/10)

struct Covering {
    int m = 0;
    double epsilon = 0;
    double divisor = kCoveringDivisor;
    double dilation = kCoveringDilation;
    std::vector<Ball> selected;              // disjoint family G (radius R_ε/divisor)
    std::vector<Ball> dilated;               // C_ε (radius dilation·r)
    std::vector<std::vector<int>> membership; // per grid point: dilated balls containing it
    std::vector<int> overlap;                 // per grid point: membership count
    int max_overlap = 0;
    double overlap_bound_T = 0; // ((1+ε)/(1-ε))^{n/2} divisor^n
    int max_patch_overlap = 0;  // same count for the B(x, R_ε/10) patches
    std::vector<Ball> patches;  // Lemma-m8 patch family at the selected centers
    std::vector<std::size_t> excluded_degenerate; // grid points left out
    bool disjoint_verified = false;
    bool cover_verified = false;

    std::string to_json() const; // export for plotting
};

/// Candidate family {B(x, R_ε(x)/divisor)} over the non-degenerate sample
/// points, Vitali selection in the grid-geodesic metric, dilated family and
/// per-point membership lists.
Covering build_admissible_covering(const ChartMetric& metric, const RadiusField& field,
                                   const GridGeodesics& geo, double divisor = kCoveringDivisor,
                                   double dilation = kCoveringDilation);

/// Prop-CF9 overlap bound for a covering built with the given divisor.
double overlap_bound(int n, double epsilon, double divisor = kCoveringDivisor);

struct WeightField {
    double gamma = 0;
    GridFunction values; // w(x) = R_ε(x)^γ on the sample points
};

WeightField make_weight(const RadiusField& field, double gamma);

/// ∫ |f|^τ w dv with the √det(g) volume element; τ = ∞ returns the
/// essential sup of |f| (weight ignored).
double weighted_norm(const GridFunction& modulus, double tau, const GridFunction* weight,
                     const GridFunction* sqrt_det);

/// Lemma-m8 two-sided equivalence of the weighted norm with the patch sum
/// Σ_x R(x)^γ ‖f‖^τ_{L^τ(B(x, R/10))}, with the explicit constants
/// 2^{|γ|} and 2^{|γ|}·T.
struct NormEquivalence {
    double direct = 0;    // ‖f‖^τ_{L^τ(M,w)}
    double patch_sum = 0; // Σ_x R(x)^γ ‖f‖^τ_{L^τ(B(x))}
    double lower_constant = 0, upper_constant = 0;
    bool lower_ok = false; // direct <= 2^{|γ|} · patch_sum
    bool upper_ok = false; // patch_sum <= 2^{|γ|} T · direct
};

NormEquivalence patch_norm_equivalence(const Covering& cov, const RadiusField& field,
                                       const GridGeodesics& geo, const GridFunction& modulus,
                                       double gamma, double tau, const GridFunction& sqrt_det);

/// Local-to-global assembly of Theorem-6.2 style bounds: the weighted LHS
/// (Σ_ball R^γ · local^r)^{1/r} against c · (time factor) · ‖ω‖_{L^r(M,w')}.
struct LocalContribution {
    double local_norm = 0; // ‖∇^k u‖_{L^r(B(x))}
    double r_eps = 0;
    int k = 0;
    double r = 2;
    int alpha = 1;
};

struct GlobalAssembly {
    double weighted_lhs = 0;
    double rhs_base = 0;  // ‖ω‖_{L^r(M, w')}
    double needed_c = 0;  // weighted_lhs / (shape · rhs_base)
};

GlobalAssembly globalize(const std::vector<LocalContribution>& locals, double gamma_w,
                         double shape_value, double omega_norm_wprime);

} // namespace heatforms
