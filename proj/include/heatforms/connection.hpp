#pragma once

#include <Eigen/Dense>

#include "heatforms/admissible.hpp"
#include "heatforms/chart_metric.hpp"
#include "heatforms/form_field.hpp"

namespace heatforms {

/// Levi-Civita Christoffel symbols Γ^i_{kj} and their coordinate derivatives
/// ∂^σ Γ at a point, from Γ^i_{kj} = ½ g^{il}(∂_j g_{kl} + ∂_k g_{lj} - ∂_l g_{jk}).
class ChristoffelDerivs {
public:
    ChristoffelDerivs(const ChartMetric& metric, const std::vector<double>& y, int order);

    int dim() const { return n_; }
    int order() const { return order_; }
    double gamma(int i, int k, int j) const;                          // Γ^i_{kj}
    double dgamma(const MultiIndex& sigma, int i, int k, int j) const; // ∂^σ Γ^i_{kj}
    /// max |∂^σ Γ| over all |σ| = d and index triples
    double derivative_sup(int d) const;

private:
    int n_ = 0, order_ = 0;
    std::vector<MultiIndex> sigmas_;
    std::vector<double> values_; // [sigma][i][k][j]
    double entry(int s, int i, int k, int j) const;
};

ChristoffelDerivs christoffel(const ChartMetric& metric, const std::vector<double>& y,
                              int order = 0);

/// Γ^i_{jk} sampled on every grid node (for covariant derivatives of fields).
class ChristoffelGrid {
public:
    explicit ChristoffelGrid(const ChartMetric& metric);
    double gamma(std::size_t point, int i, int j, int k) const {
        return values_[((point * (std::size_t)n_ + i) * n_ + j) * n_ + k];
    }
    int dim() const { return n_; }

private:
    int n_;
    std::vector<double> values_;
};

/// One covariant-derivative step on a totally covariant tensor:
/// (∇T)_{a,I} = ∂_a T_I - Σ_ν Γ^k_{a i_ν} T_{I[ν→k]}. The new index is
/// prepended. Passing chris = nullptr takes plain partial derivatives.
TensorField covariant_derivative_step(const TensorField& T, const ChristoffelGrid* chris);

/// ∇^k u of a p-form as a rank p+k tensor field (derivative slots first).
TensorField covariant_derivative(const ChartMetric& metric, const FormField& u, int k);
TensorField covariant_derivative(const ChristoffelGrid& chris, const FormField& u, int k);

/// Plain ∂^k tensor of the coefficients (the chart-image side of Lemma-m3
/// style comparisons).
TensorField euclidean_derivative_tensor(const FormField& u, int k);

/// Pointwise modulus via the metric inner product on Λ^p ⊗ (T*M)^{⊗k}:
/// contracts every slot with g^{-1} and divides by p! for the form slots.
/// A null metric contracts with the identity (Euclidean modulus).
GridFunction tensor_modulus(const ChartMetric* metric, const TensorField& T, int form_rank);

/// Ricci tensor at a point by the standard curvature contraction.
Eigen::MatrixXd ricci_tensor(const ChartMetric& metric, const std::vector<double>& y);

/// |∇^j Rc| over the grid (j-th covariant derivative of the Ricci field).
GridFunction ricci_derivative_modulus(const ChartMetric& metric, int j);

/// L^r norm over a point subset with optional volume weight √det g.
double ball_lr_norm(const GridFunction& f, const std::vector<std::size_t>& points, double r,
                    const GridFunction* sqrt_det = nullptr);

struct SobolevCompareReport {
    double lhs = 0;            // ‖∇^k u‖_{L^r(B)} (metric measure and modulus)
    double rhs_leading = 0;    // ‖∂^k v‖_{L^r(B_e(x,(1+ε)R))} (Euclidean)
    double correction_sum = 0; // Σ_{j<k} ‖∂^j v‖ over the dilated Euclidean ball
    double needed_forward_c = 0;
    double forward_margin = 0; // with the supplied constant

    double reverse_lhs = 0;  // ‖v‖_{W^{k,r}} over B_e(x,(1-ε)R)
    double reverse_rhs = 0;  // R^{-k} ‖u‖_{W^{k,r}(B)}
    double needed_reverse_c = 0;
    double reverse_margin = 0;

    double pointwise_needed_c = 0; // k=1, p>=1: |∇u| <= |∂v| + CεR^{-1}|v| per point
    int required_order = 0;
};

/// Two-sided chart-vs-covariant norm comparison on an admissible ball.
/// forward_c / reverse_c are corpus-fitted constants; margins are reported
/// against them. Throws when the ball's admissibility order is below
/// β = max(k-1,1) (p=0) or max(k,2) (p>=1).
SobolevCompareReport sobolev_compare(const ChartMetric& metric, const FormField& u,
                                     const AdmissibleBall& ball, int k, double r,
                                     double forward_c, double reverse_c);

/// Required admissibility order for Theorem-m6-style statements.
int required_admissible_order(int p, int k);

} // namespace heatforms
