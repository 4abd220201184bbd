#pragma once

#include <optional>
#include <vector>

#include "heatforms/grid.hpp"

namespace heatforms {

/// Evaluation request for the Euclidean heat kernel and its derivatives.
struct KernelQuery {
    int n = 1;
    double t = 0;
    std::vector<double> x;
    MultiIndex gamma; // length n, entries >= 0
};

/// ∂^γ Φ(x,t) for the heat kernel Φ(x,t) = (4πt)^{-n/2} e^{-|x|²/4t}.
/// Identically 0 for t <= 0. Closed forms for |γ| <= 2; nested 4th-order
/// central differences with step max(1e-4, 1e-3·√t) above that.
double kernel_eval(const KernelQuery& q);

/// One-dimensional kernel factor ∂^m φ(y,t); the n-dimensional kernel is the
/// product of these over axes.
double kernel_factor_1d(int order, double y, double t);

/// ‖∂^γ Φ(·,t)‖_{L^r(ℝⁿ)}. Closed form for |γ| <= 1; otherwise per-axis
/// composite Gauss–Legendre on [-12√t, 12√t] split at the sign changes of the
/// integrand (the box integral of the product kernel factorizes exactly).
/// r may be infinity: grid supremum with one Newton refinement at the
/// discrete maximizer.
double kernel_lr_norm(int n, const MultiIndex& gamma, double r, double t);

/// Quadrature-only path (no closed forms), used to cross-check the |γ| <= 1
/// closed forms.
double kernel_lr_norm_quadrature(int n, const MultiIndex& gamma, double r, double t);

struct HeatApplyDiag {
    double max_truncated_mass = 0; // worst kernel mass lost to the box
    bool truncation_warning = false; // set when the above exceeds 1e-10
};

/// ∂^γ (e^{tΔ} f) on the grid of f, by quadrature of the convolution with the
/// kernel derivative. Zero extension outside the box unless the box is
/// periodic (then the kernel is periodized). Implemented as separable
/// per-axis passes; heat_apply_direct below is the full-dimensional
/// quadrature used to validate the optimization.
GridFunction heat_apply(const GridFunction& f, double t, const MultiIndex& gamma,
                        HeatApplyDiag* diag = nullptr);

GridFunction heat_apply(const GridFunction& f, double t, HeatApplyDiag* diag = nullptr);

/// Direct N-dimensional convolution sum (O(N^{2n}); small grids only).
GridFunction heat_apply_direct(const GridFunction& f, double t, const MultiIndex& gamma);

/// Fitted form of the Prop-HH2-style smoothing bound ‖∂^γ e^{tΔ}‖_{r→s} <= c·t^{-e}.
struct SmoothingBound {
    int n = 1;
    double r = 1, s = 1;
    MultiIndex gamma;
    double constant = 0; // measured envelope of ratio·t^e over the grid
    double exponent = 0; // e = |γ|/2 + (n/2)(1/r - 1/s)
};

struct SmoothingCheckResult {
    SmoothingBound bound;
    std::vector<double> t_grid;
    std::vector<double> ratios;  // sup over corpus of ‖∂^γ u(t)‖_s / ‖f‖_r
    double fitted_slope = 0;
    double fit_residual = 0;
    bool pass = false; // slope <= -e + 0.03 and envelope finite
};

/// Measures the operator ratio over a corpus of initial data across a t grid
/// (>= 1.5 decades), fits the log-log slope and the envelope constant.
SmoothingCheckResult smoothing_bound_check(const std::vector<GridFunction>& corpus,
                                           double r, double s, const MultiIndex& gamma,
                                           const std::vector<double>& t_grid);

} // namespace heatforms
