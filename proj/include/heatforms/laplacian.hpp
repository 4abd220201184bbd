#pragma once

#include <Eigen/Dense>

#include "heatforms/admissible.hpp"
#include "heatforms/chart_metric.hpp"
#include "heatforms/connection.hpp"
#include "heatforms/form_field.hpp"

namespace heatforms {

/// Laplace–Beltrami operator on functions in divergence form,
/// Δ_φ f = (1/√det g) ∂_i (g^{ij} √det g ∂_j f), with the coefficient fields
/// expanded by the exact product rule (flat metric: Σ_j ∂²_j f).
GridFunction laplacian_functions(const ChartMetric& metric, const GridFunction& f);

/// Pointwise coefficients of the nonnegative Hodge Laplacian on p-forms in
/// the sorted-component basis:
///   (L α)_K = Σ_M [ -g^{ab} δ_{KM} ∂²_{ab} α_M + B_c[K,M] ∂_c α_M + C[K,M] α_M ]
/// assembled from Γ and ∂Γ through the covariant-derivative expansion plus
/// the De Rham commutator sum. C splits into the connection-Laplacian part
/// and the Weitzenböck curvature part (the commutator contribution).
struct HodgeCoeffs {
    int n = 0, p = 0, D = 1;
    Eigen::MatrixXd ginv;              // g^{ab} at the point
    std::vector<Eigen::MatrixXd> B;    // per axis c: D×D first-order blocks
    Eigen::MatrixXd C_connection;      // zeroth order from ∇*∇
    Eigen::MatrixXd C_curvature;       // zeroth order from the commutator sum
    Eigen::MatrixXd C() const { return C_connection + C_curvature; }
};

HodgeCoeffs hodge_coefficients(const ChartMetric& metric, int p, const std::vector<double>& y);

/// Nonnegative Hodge Laplacian of a p-form (p >= 1), coefficient route.
/// On the flat metric this reduces to componentwise -Σ ∂² exactly.
FormField hodge_laplacian(const ChartMetric& metric, const FormField& u);

/// Independent route: -g^{ab}∇_a∇_b α plus the De Rham commutator contraction
/// evaluated from actual iterated covariant derivatives. Used to cross-check
/// hodge_laplacian; the two must agree to FD accuracy.
FormField hodge_laplacian_bochner(const ChartMetric& metric, const FormField& u);

/// Grid-sampled coefficients of the perturbation Y = L_g - L_e (nonnegative
/// convention; L_e is the flat componentwise -Σ∂²). The second-order
/// coefficient is -(g^{ab} - δ^{ab}) Id; a_ij = g^{ij} - δ^{ij} is stored in
/// the paper's sign convention.
class PerturbationOperator {
public:
    PerturbationOperator(const ChartMetric& metric, int p);

    int degree() const { return p_; }
    int components() const { return D_; }
    const GridBox& box() const { return box_; }

    /// Y u with derivatives of u taken by finite differences.
    FormField apply(const FormField& u) const;

    /// Y applied to already-available derivative fields of a component:
    /// callers that evolve by kernel convolution pass exact derivatives.
    /// d2[a][b], d1[c], d0 are the fields of component M; accumulates into
    /// out (all components' contributions to each row K).
    void accumulate(FormField& out, int M, const std::vector<std::vector<GridFunction>>& d2,
                    const std::vector<GridFunction>& d1, const GridFunction& d0) const;

    double a_sum_at(std::size_t point) const { return a_sum_.values[point]; }
    double lower_order_sum_at(std::size_t point) const { return lower_sum_.values[point]; }
    const GridFunction& a_sum_field() const { return a_sum_; }
    const GridFunction& lower_order_sum_field() const { return lower_sum_; }

private:
    friend struct PerturbationCoeffs;
    int p_ = 0, D_ = 1, n_ = 1;
    GridBox box_;
    std::vector<GridFunction> a_;            // n*n fields, g^{ij} - δ^{ij}
    std::vector<std::vector<GridFunction>> B_; // [c][K*D+M]
    std::vector<GridFunction> C_;            // [K*D+M]
    GridFunction a_sum_;     // Σ_{ij} |a_ij| per point
    GridFunction lower_sum_; // max_K Σ_c Σ_M |B_c[K,M]| + Σ_M |C[K,M]| per point
};

/// Lemma-gC16-shaped coefficient report on a ball: Σ|a_ij| <= ε and the
/// first-plus-zeroth-order budget <= C ε R^{-α} with a corpus-fitted C.
struct PerturbationCoeffs {
    int alpha = 1;             // 1 for p = 0, 2 for p >= 1
    double sup_a_sum = 0;      // sup over ball samples of Σ|a_ij|
    double sup_lower_sum = 0;  // sup over ball samples of the lower-order budget
    bool a_bound_ok = false;   // sup_a_sum <= ε
    double needed_c = 0;       // sup_lower_sum / (ε R^{-α})
};

struct PerturbationResult {
    FormField Yu;
    PerturbationCoeffs coeffs;
};

/// Applies Y on the chart and verifies the Lemma-gC16 coefficient bounds on
/// the given admissible ball. Throws when the ball's admissibility order is
/// below α (1 for functions, 2 for p-forms).
PerturbationResult perturbation_apply(const ChartMetric& metric, const AdmissibleBall& ball,
                                      const FormField& u);
PerturbationResult perturbation_apply(const PerturbationOperator& Y, const ChartMetric& metric,
                                      const AdmissibleBall& ball, const FormField& u);

} // namespace heatforms
