#include "heatforms/discrete_operator.hpp"

#include <cmath>
#include <fstream>

#include "heatforms/laplacian.hpp"

namespace heatforms {

Eigen::MatrixXd fiber_gram(const Eigen::MatrixXd& ginv, int p) {
    auto idxs = form_indices((int)ginv.rows(), p);
    int D = (int)idxs.size();
    Eigen::MatrixXd G(D, D);
    for (int K = 0; K < D; ++K)
        for (int M = 0; M < D; ++M) {
            Eigen::MatrixXd minor(p, p);
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) minor(a, b) = ginv(idxs[K][a], idxs[M][b]);
            G(K, M) = p == 0 ? 1.0 : minor.determinant();
        }
    return G;
}

Eigen::VectorXd DiscreteOperator::to_vector(const FormField& u) const {
    Eigen::VectorXd v(dofs());
    for (int K = 0; K < D; ++K)
        for (std::size_t pt = 0; pt < box.size(); ++pt) v[dof(K, pt)] = u.coeffs[K].values[pt];
    return v;
}

FormField DiscreteOperator::to_form(const Eigen::VectorXd& v) const {
    FormField u(p, box);
    for (int K = 0; K < D; ++K)
        for (std::size_t pt = 0; pt < box.size(); ++pt) u.coeffs[K].values[pt] = v[dof(K, pt)];
    return u;
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd av = quadratic * v;
    Eigen::VectorXd out(dofs());
    std::size_t npts = box.size();
    Eigen::VectorXd block(D), res(D);
    for (std::size_t pt = 0; pt < npts; ++pt) {
        for (int K = 0; K < D; ++K) block[K] = av[dof(K, pt)];
        res = mass_inv_blocks[pt] * block;
        for (int K = 0; K < D; ++K) out[dof(K, pt)] = res[K];
    }
    return out;
}

FormField DiscreteOperator::apply(const FormField& u) const { return to_form(apply(to_vector(u))); }

Eigen::VectorXd DiscreteOperator::apply_mass(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(dofs());
    Eigen::VectorXd block(D), res(D);
    for (std::size_t pt = 0; pt < box.size(); ++pt) {
        for (int K = 0; K < D; ++K) block[K] = v[dof(K, pt)];
        res = mass_blocks[pt] * block;
        for (int K = 0; K < D; ++K) out[dof(K, pt)] = res[K];
    }
    return out;
}

double DiscreteOperator::m_norm(const Eigen::VectorXd& v) const {
    return std::sqrt(std::max(0.0, v.dot(apply_mass(v))));
}

void DiscreteOperator::save_triplets(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_triplets: cannot open " + path);
    out << "# heatforms sparse operator, quadratic-form triplets (row col value)\n";
    out << quadratic.rows() << " " << quadratic.cols() << " " << quadratic.nonZeros() << "\n";
    out.precision(17);
    for (int k = 0; k < quadratic.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(quadratic, k); it; ++it)
            out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

namespace {

struct StencilEntry {
    long node = -1; // flat point index, -1 = ghost (zero extension)
    Eigen::MatrixXd coeff;
};

// clamp a midpoint into the box for metric evaluation near zero-extension edges
std::vector<double> clamp_into(const GridBox& box, std::vector<double> x) {
    if (!box.periodic)
        for (int a = 0; a < box.n; ++a) x[a] = std::clamp(x[a], box.lo[a], box.hi[a]);
    return x;
}

} // namespace

DiscreteOperator assemble_discrete(const ChartMetric& metric, int p, Boundary boundary) {
    const GridBox& box = metric.domain();
    int n = box.n;
    if (p < 0 || p > n) throw std::invalid_argument("assemble_discrete: p > n rejected");
    if ((boundary == Boundary::Periodic) != box.periodic)
        throw std::invalid_argument("assemble_discrete: boundary tag does not match the box");

    DiscreteOperator op;
    op.box = box;
    op.p = p;
    op.boundary = boundary;
    auto idxs = form_indices(n, p);
    op.D = (int)idxs.size();
    int D = op.D;
    for (int a = 0; a < n; ++a) op.h = std::max(op.h, box.spacing(a));
    std::size_t npts = box.size();
    double cellv = box.cell_volume();

    // pointwise geometry caches
    std::vector<Eigen::MatrixXd> ginv(npts), gram(npts);
    std::vector<double> sdet(npts);
    for (std::size_t pt = 0; pt < npts; ++pt) {
        auto x = box.point(pt);
        ginv[pt] = metric.inverse(x);
        gram[pt] = fiber_gram(ginv[pt], p);
        sdet[pt] = metric.sqrt_det(x);
    }

    op.mass_blocks.resize(npts);
    op.mass_inv_blocks.resize(npts);
    for (std::size_t pt = 0; pt < npts; ++pt) {
        op.mass_blocks[pt] = sdet[pt] * cellv * gram[pt];
        op.mass_inv_blocks[pt] = op.mass_blocks[pt].inverse();
    }

    // connection matrices P_a on demand (only needed for p >= 1)
    auto connection_at = [&](const std::vector<double>& x) {
        std::vector<Eigen::MatrixXd> P(n, Eigen::MatrixXd::Zero(D, D));
        if (p == 0) return P;
        ChristoffelDerivs cd(metric, x, 0);
        for (int a = 0; a < n; ++a)
            for (int K = 0; K < D; ++K)
                for (int nu = 0; nu < p; ++nu)
                    for (int k = 0; k < n; ++k) {
                        FormIndex rep = idxs[K];
                        rep[nu] = k;
                        AntisymLookup l = antisym_lookup(n, rep);
                        if (l.sign == 0) continue;
                        P[a](K, l.rank) -= l.sign * cd.gamma(k, a, idxs[K][nu]);
                    }
        return P;
    };

    std::vector<Eigen::Triplet<double>> trips;
    auto add_block = [&](long r, long c, const Eigen::MatrixXd& blk) {
        if (r < 0 || c < 0) return;
        for (int K = 0; K < D; ++K)
            for (int M = 0; M < D; ++M)
                if (blk(K, M) != 0.0)
                    trips.emplace_back((int)((std::size_t)K * npts + r),
                                       (int)((std::size_t)M * npts + c), blk(K, M));
    };

    auto neighbor = [&](const std::vector<int>& idx, int axis, int step) -> long {
        int i = idx[axis] + step;
        if (box.periodic) {
            std::vector<int> q = idx;
            q[axis] = ((i % box.npts[axis]) + box.npts[axis]) % box.npts[axis];
            return (long)box.flat_index(q);
        }
        if (i < 0 || i >= box.npts[axis]) return -1;
        std::vector<int> q = idx;
        q[axis] = i;
        return (long)box.flat_index(q);
    };

    // staggered diagonal terms Σ_a Ẽ_aᵀ W_aa Ẽ_a, midpoint weights
    for (int a = 0; a < n; ++a) {
        double ha = box.spacing(a);
        int edges_lo = box.periodic ? 0 : 0;
        int edges_hi = box.periodic ? box.npts[a] - 1 : box.npts[a]; // zero-ext: N+1 edges
        for (std::size_t pt = 0; pt < npts; ++pt) {
            auto idx = box.unflatten(pt);
            // edge between (idx[a]-1 -> ghost allowed) is visited from its left
            // node; iterate the edge that starts at this node
            (void)edges_lo;
            (void)edges_hi;
            // right edge of this node along axis a
            long left = (long)pt;
            long right = neighbor(idx, a, +1);
            if (box.periodic || right >= 0 || idx[a] == box.npts[a] - 1) {
                auto xm = box.point(pt);
                xm[a] += 0.5 * ha;
                xm = clamp_into(box, xm);
                Eigen::MatrixXd gm = metric.inverse(xm);
                double w = gm(a, a) * metric.sqrt_det(xm) * cellv;
                Eigen::MatrixXd W = w * fiber_gram(gm, p);
                auto P = connection_at(xm);
                Eigen::MatrixXd cl = -Eigen::MatrixXd::Identity(D, D) / ha + 0.5 * P[a];
                Eigen::MatrixXd cr = Eigen::MatrixXd::Identity(D, D) / ha + 0.5 * P[a];
                StencilEntry e1{left, cl}, e2{right, cr};
                for (const auto& s1 : {e1, e2})
                    for (const auto& s2 : {e1, e2})
                        if (s1.node >= 0 && s2.node >= 0)
                            add_block(s1.node, s2.node, s1.coeff.transpose() * W * s2.coeff);
            }
            // the outer left edge of the first node (zero extension only)
            if (!box.periodic && idx[a] == 0) {
                auto xm = box.point(pt);
                xm[a] -= 0.5 * ha;
                xm = clamp_into(box, xm);
                Eigen::MatrixXd gm = metric.inverse(xm);
                double w = gm(a, a) * metric.sqrt_det(xm) * cellv;
                Eigen::MatrixXd W = w * fiber_gram(gm, p);
                auto P = connection_at(xm);
                Eigen::MatrixXd cr = Eigen::MatrixXd::Identity(D, D) / ha + 0.5 * P[a];
                add_block((long)pt, (long)pt, cr.transpose() * W * cr);
            }
        }
    }

    // node-centered cross terms Σ_{a≠b} Ẽ_aᵀ W_ab Ẽ_b (vanish for diagonal metrics)
    bool any_offdiag = false;
    for (std::size_t pt = 0; pt < npts && !any_offdiag; ++pt)
        for (int a = 0; a < n && !any_offdiag; ++a)
            for (int b = a + 1; b < n; ++b)
                if (std::abs(ginv[pt](a, b)) > 1e-14) { any_offdiag = true; break; }
    if (any_offdiag) {
        for (std::size_t pt = 0; pt < npts; ++pt) {
            auto idx = box.unflatten(pt);
            auto x = box.point(pt);
            auto P = connection_at(x);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    if (a == b || ginv[pt](a, b) == 0.0) continue;
                    double w = ginv[pt](a, b) * sdet[pt] * cellv;
                    Eigen::MatrixXd W = w * gram[pt];
                    double ha = box.spacing(a), hb = box.spacing(b);
                    std::vector<StencilEntry> sa = {
                        {neighbor(idx, a, -1), -Eigen::MatrixXd::Identity(D, D) / (2 * ha)},
                        {(long)pt, P[a]},
                        {neighbor(idx, a, +1), Eigen::MatrixXd::Identity(D, D) / (2 * ha)}};
                    std::vector<StencilEntry> sb = {
                        {neighbor(idx, b, -1), -Eigen::MatrixXd::Identity(D, D) / (2 * hb)},
                        {(long)pt, P[b]},
                        {neighbor(idx, b, +1), Eigen::MatrixXd::Identity(D, D) / (2 * hb)}};
                    for (const auto& s1 : sa)
                        for (const auto& s2 : sb)
                            if (s1.node >= 0 && s2.node >= 0)
                                add_block(s1.node, s2.node, s1.coeff.transpose() * W * s2.coeff);
                }
        }
    }

    // Weitzenböck curvature block (zeroth order), fiber-symmetrized
    if (p >= 1) {
        for (std::size_t pt = 0; pt < npts; ++pt) {
            HodgeCoeffs hc = hodge_coefficients(metric, p, box.point(pt));
            Eigen::MatrixXd E = sdet[pt] * cellv * (gram[pt] * hc.C_curvature);
            Eigen::MatrixXd S = 0.5 * (E + E.transpose());
            op.symmetry_defect =
                std::max(op.symmetry_defect, (E - E.transpose()).cwiseAbs().maxCoeff() * 0.5);
            add_block((long)pt, (long)pt, S);
        }
    }

    op.quadratic.resize((int)op.dofs(), (int)op.dofs());
    op.quadratic.setFromTriplets(trips.begin(), trips.end());
    return op;
}

} // namespace heatforms
