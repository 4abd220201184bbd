#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "heatforms/chart_metric.hpp"
#include "heatforms/form_field.hpp"

namespace heatforms {

enum class Boundary { Periodic, ZeroExtension };

/// Second-order finite-difference discretization of the nonnegative Hodge
/// Laplacian acting on all p-form components. Assembled as a quadratic form
/// A = Σ_ab Ẽ_aᵀ W_ab Ẽ_b + curvature block against the L²(M) mass matrix
/// M = diag blocks √det(g) hⁿ G(x), so the operator L = M⁻¹A is self-adjoint
/// in the L²(M) inner product (exactly, apart from the symmetrized curvature
/// defect recorded below). DOF layout: dof = component·npts + point.
struct DiscreteOperator {
    GridBox box;
    int p = 0, D = 1;
    Boundary boundary = Boundary::Periodic;
    double h = 0; // max grid spacing
    Eigen::SparseMatrix<double> quadratic;        // A (symmetric)
    std::vector<Eigen::MatrixXd> mass_blocks;     // per point, D×D SPD
    std::vector<Eigen::MatrixXd> mass_inv_blocks; // cached inverses
    double symmetry_defect = 0; // max |asym| removed from the curvature block

    std::size_t dofs() const { return (std::size_t)D * box.size(); }
    std::size_t dof(int component, std::size_t point) const {
        return (std::size_t)component * box.size() + point;
    }

    Eigen::VectorXd to_vector(const FormField& u) const;
    FormField to_form(const Eigen::VectorXd& v) const;

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const; // L v = M⁻¹ A v
    FormField apply(const FormField& u) const;
    Eigen::VectorXd apply_mass(const Eigen::VectorXd& v) const;
    double m_norm(const Eigen::VectorXd& v) const; // ‖v‖_{L²(M)}

    /// Text triplet dump: "row col value" lines after a short header.
    void save_triplets(const std::string& path) const;
};

/// Fiber Gram matrix G^{KM} = ⟨dx^K, dx^M⟩_g = det[(g^{k_a m_b})] on sorted
/// p-index tuples.
Eigen::MatrixXd fiber_gram(const Eigen::MatrixXd& ginv, int p);

DiscreteOperator assemble_discrete(const ChartMetric& metric, int p, Boundary boundary);

} // namespace heatforms
