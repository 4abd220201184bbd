#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatforms/expr.hpp"
#include "heatforms/grid.hpp"

namespace heatforms {

/// Metric tensor g_ij on a coordinate chart with derivative access ∂^β g_ij.
/// Components come either from analytic expressions (exact symbolic
/// derivatives) or from gridded arrays (finite differences).
class ChartMetric {
public:
    /// Analytic metric from an n×n matrix of expression strings.
    static ChartMetric analytic(GridBox domain, const std::vector<std::vector<std::string>>& g);
    /// Analytic metric from already-parsed expressions.
    static ChartMetric analytic_expressions(GridBox domain, std::vector<std::vector<Expression>> g);
    /// Gridded metric: components[i][j] sampled on the domain grid.
    static ChartMetric gridded(GridBox domain, std::vector<std::vector<GridFunction>> components,
                               int max_derivative_order = 4);
    static ChartMetric flat(GridBox domain);

    int dim() const { return domain_.n; }
    const GridBox& domain() const { return domain_; }
    bool is_analytic() const { return analytic_; }

    /// ∂^β g_ij at a point (β = zero multi-index gives g_ij itself).
    double component(int i, int j, const std::vector<double>& x, const MultiIndex& beta) const;
    double component(int i, int j, const std::vector<double>& x) const;

    Eigen::MatrixXd matrix(const std::vector<double>& x) const;
    Eigen::MatrixXd inverse(const std::vector<double>& x) const;
    double det(const std::vector<double>& x) const;
    double sqrt_det(const std::vector<double>& x) const;

    /// ∂^β of the inverse metric g^{ij}, by the recursive Leibniz expansion of
    /// ∂(g^{-1}) = -g^{-1} (∂g) g^{-1}.
    Eigen::MatrixXd inverse_derivative(const std::vector<double>& x, const MultiIndex& beta) const;

    /// Extreme eigenvalues of g at x (symmetric eigensolver).
    std::pair<double, double> eigen_range(const std::vector<double>& x) const;

    /// Largest |∂^β g_ij| over i,j for all |β| = d at the point.
    double derivative_sup(const std::vector<double>& x, int d) const;

    /// Validates symmetry, positive definiteness and g·g^{-1} = I on the grid.
    void validate() const;

private:
    ChartMetric() = default;

    GridBox domain_;
    bool analytic_ = true;
    int max_order_ = 6;

    // analytic storage: derivative expressions per component and beta rank
    std::vector<std::vector<std::vector<Expression>>> exprs_;
    std::vector<std::vector<Expression>> base_;

    // gridded storage: FD derivative fields per component, precomputed
    std::vector<std::vector<std::vector<GridFunction>>> fields_; // [i][j][beta_rank]

    static int beta_rank(const MultiIndex& beta, int n, int max_order);
    double component_ranked(int i, int j, const std::vector<double>& x, int rank) const;
    double grid_lookup(const GridFunction& f, const std::vector<double>& x) const;
};

/// Multi-index enumeration: all β with |β| <= max_order, rank-addressed.
std::vector<MultiIndex> enumerate_multi_indices(int n, int max_order);

/// Parses the metric-definition JSON (analytic expressions or gridded
/// arrays); schema documented in docs/schemas.md.
ChartMetric load_metric_json(const std::string& path);
ChartMetric parse_metric_json(const std::string& text);

} // namespace heatforms
