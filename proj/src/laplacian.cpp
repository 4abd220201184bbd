#include "heatforms/laplacian.hpp"

#include <cmath>

namespace heatforms {

GridFunction laplacian_functions(const ChartMetric& metric, const GridFunction& f) {
    const GridBox& box = metric.domain();
    if (!box.same_layout(f.box))
        throw std::invalid_argument("laplacian_functions: grid layout mismatch");
    int n = box.n;

    std::vector<GridFunction> d1(n, GridFunction(box));
    std::vector<std::vector<GridFunction>> d2(n, std::vector<GridFunction>(n, GridFunction(box)));
    for (int a = 0; a < n; ++a) d1[a] = finite_difference(f, a, 1);
    for (int a = 0; a < n; ++a) {
        d2[a][a] = finite_difference(f, a, 2);
        for (int b = a + 1; b < n; ++b) {
            d2[a][b] = finite_difference(d1[a], b, 1);
            d2[b][a] = d2[a][b];
        }
    }

    GridFunction out(box);
    for (std::size_t p = 0; p < box.size(); ++p) {
        auto x = box.point(p);
        Eigen::MatrixXd g = metric.matrix(x);
        if (std::abs(g.determinant()) < 1e-14)
            throw std::domain_error("laplacian_functions: singular det(g)");
        Eigen::MatrixXd ginv = g.inverse();
        double v = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) v += ginv(a, b) * d2[a][b].values[p];
        // first-order coefficient by the exact product rule:
        // b^j = Σ_a [ ∂_a g^{aj} + g^{aj} tr(g^{-1} ∂_a g)/2 ]
        for (int a = 0; a < n; ++a) {
            MultiIndex ea(n, 0);
            ea[a] = 1;
            Eigen::MatrixXd dginv = metric.inverse_derivative(x, ea);
            Eigen::MatrixXd dg(n, n);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) dg(i, k) = metric.component(i, k, x, ea);
            double half_trace = 0.5 * (ginv * dg).trace();
            for (int j = 0; j < n; ++j)
                v += (dginv(a, j) + ginv(a, j) * half_trace) * d1[j].values[p];
        }
        out.values[p] = v;
    }
    return out;
}

namespace {

// replacement matrices of the form connection: (P_a α)_K = -Σ_ν Γ^k_{a k_ν} α_{K[ν→k]}
std::vector<Eigen::MatrixXd> connection_matrices(const ChristoffelDerivs& cd, int n, int p,
                                                 const std::vector<FormIndex>& idxs,
                                                 const MultiIndex* dsigma) {
    int D = (int)idxs.size();
    std::vector<Eigen::MatrixXd> P(n, Eigen::MatrixXd::Zero(D, D));
    for (int a = 0; a < n; ++a)
        for (int K = 0; K < D; ++K) {
            const FormIndex& J = idxs[K];
            for (int nu = 0; nu < p; ++nu)
                for (int k = 0; k < n; ++k) {
                    FormIndex rep = J;
                    rep[nu] = k;
                    AntisymLookup l = antisym_lookup(n, rep);
                    if (l.sign == 0) continue;
                    double gamma =
                        dsigma ? cd.dgamma(*dsigma, k, a, J[nu]) : cd.gamma(k, a, J[nu]);
                    P[a](K, l.rank) -= l.sign * gamma;
                }
        }
    return P;
}

} // namespace

HodgeCoeffs hodge_coefficients(const ChartMetric& metric, int p, const std::vector<double>& y) {
    int n = metric.dim();
    if (p < 0 || p > n) throw std::invalid_argument("hodge_coefficients: need 0 <= p <= n");
    auto idxs = form_indices(n, p);
    int D = (int)idxs.size();

    HodgeCoeffs hc;
    hc.n = n;
    hc.p = p;
    hc.D = D;
    hc.ginv = metric.inverse(y);

    ChristoffelDerivs cd(metric, y, 1);
    auto P = connection_matrices(cd, n, p, idxs, nullptr);
    std::vector<std::vector<Eigen::MatrixXd>> dP(n);
    for (int c = 0; c < n; ++c) {
        MultiIndex ec(n, 0);
        ec[c] = 1;
        dP[c] = connection_matrices(cd, n, p, idxs, &ec);
    }

    // connection Laplacian -g^{ab}∇_a∇_b:
    //   B^{(c)} = -2 g^{cb} P_b + (g^{ab} Γ^c_{ab}) Id
    //   C_conn  = -g^{ab} [ ∂_a P_b - Γ^c_{ab} P_c + P_a P_b ]
    hc.B.assign(n, Eigen::MatrixXd::Zero(D, D));
    for (int c = 0; c < n; ++c) {
        for (int b = 0; b < n; ++b) hc.B[c] -= 2.0 * hc.ginv(c, b) * P[b];
        double tr = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) tr += hc.ginv(a, b) * cd.gamma(c, a, b);
        hc.B[c] += tr * Eigen::MatrixXd::Identity(D, D);
    }
    hc.C_connection = Eigen::MatrixXd::Zero(D, D);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Eigen::MatrixXd inner = dP[a][b] + P[a] * P[b];
            for (int c = 0; c < n; ++c) inner -= cd.gamma(c, a, b) * P[c];
            hc.C_connection -= hc.ginv(a, b) * inner;
        }

    // De Rham commutator sum: zeroth order only, via the curvature operators
    // R_{ab} = ∂_a P_b - ∂_b P_a + [P_a, P_b]
    hc.C_curvature = Eigen::MatrixXd::Zero(D, D);
    if (p >= 1) {
        std::vector<std::vector<Eigen::MatrixXd>> R(n, std::vector<Eigen::MatrixXd>(n));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                R[a][b] = dP[a][b] - dP[b][a] + P[a] * P[b] - P[b] * P[a];

        for (int K = 0; K < D; ++K) {
            const FormIndex& Kidx = idxs[K];
            for (int nu = 0; nu < p; ++nu) {
                double sign_nu = ((nu + 1) % 2 == 0) ? 1.0 : -1.0; // (-1)^ν, ν from 1
                int knu = Kidx[nu];
                FormIndex tup(p);
                for (int q = 0, pos = 1; q < p; ++q)
                    if (q != nu) tup[pos++] = Kidx[q];
                for (int i = 0; i < n; ++i) {
                    tup[0] = i;
                    AntisymLookup l = antisym_lookup(n, tup);
                    if (l.sign == 0) continue;
                    for (int b = 0; b < n; ++b) {
                        double w = hc.ginv(i, b);
                        if (w == 0) continue;
                        hc.C_curvature.row(K) += sign_nu * w * l.sign * R[knu][b].row(l.rank);
                    }
                }
            }
        }
    }
    return hc;
}

FormField hodge_laplacian(const ChartMetric& metric, const FormField& u) {
    const GridBox& box = metric.domain();
    if (!box.same_layout(u.box)) throw std::invalid_argument("hodge_laplacian: grid mismatch");
    int n = box.n, D = u.components();

    std::vector<std::vector<GridFunction>> d1(D);
    std::vector<std::vector<std::vector<GridFunction>>> d2(D);
    for (int M = 0; M < D; ++M) {
        d1[M].reserve(n);
        for (int a = 0; a < n; ++a) d1[M].push_back(finite_difference(u.coeffs[M], a, 1));
        d2[M].assign(n, std::vector<GridFunction>(n, GridFunction(box)));
        for (int a = 0; a < n; ++a) {
            d2[M][a][a] = finite_difference(u.coeffs[M], a, 2);
            for (int b = a + 1; b < n; ++b) {
                d2[M][a][b] = finite_difference(d1[M][a], b, 1);
                d2[M][b][a] = d2[M][a][b];
            }
        }
    }

    FormField out(u.degree, box);
    for (std::size_t pt = 0; pt < box.size(); ++pt) {
        HodgeCoeffs hc = hodge_coefficients(metric, u.degree, box.point(pt));
        Eigen::MatrixXd C = hc.C();
        for (int K = 0; K < D; ++K) {
            double v = 0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) v -= hc.ginv(a, b) * d2[K][a][b].values[pt];
            for (int M = 0; M < D; ++M) {
                for (int c = 0; c < n; ++c) v += hc.B[c](K, M) * d1[M][c].values[pt];
                v += C(K, M) * u.coeffs[M].values[pt];
            }
            out.coeffs[K].values[pt] = v;
        }
    }
    return out;
}

FormField hodge_laplacian_bochner(const ChartMetric& metric, const FormField& u) {
    const GridBox& box = metric.domain();
    int n = box.n, p = u.degree;
    auto idxs = form_indices(n, p);

    TensorField T1 = covariant_derivative(metric, u, 1);
    ChristoffelGrid chris(metric);
    TensorField T2 = covariant_derivative_step(T1, &chris); // slots (a_outer, b_inner, J...)

    FormField out(p, box);
    std::vector<int> tup(2 + p);
    for (std::size_t pt = 0; pt < box.size(); ++pt) {
        Eigen::MatrixXd ginv = metric.inverse(box.point(pt));
        for (std::size_t K = 0; K < idxs.size(); ++K) {
            const FormIndex& Kidx = idxs[K];
            double v = 0;
            // -g^{ab} (∇²α)_{ab,K}
            for (int q = 0; q < p; ++q) tup[2 + q] = Kidx[q];
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    tup[0] = a;
                    tup[1] = b;
                    v -= ginv(a, b) * T2.at(tup).values[pt];
                }
            // + Σ_ν (-1)^ν g^{ib} [ (∇²α)_{k_ν b,(i,hatK)} - (∇²α)_{b k_ν,(i,hatK)} ]
            for (int nu = 0; nu < p; ++nu) {
                double sign_nu = ((nu + 1) % 2 == 0) ? 1.0 : -1.0;
                int knu = Kidx[nu];
                for (int q = 0, pos = 3; q < p; ++q)
                    if (q != nu) tup[pos++] = Kidx[q];
                for (int i = 0; i < n; ++i) {
                    tup[2] = i;
                    for (int b = 0; b < n; ++b) {
                        double w = ginv(i, b);
                        if (w == 0) continue;
                        tup[0] = knu;
                        tup[1] = b;
                        double forward = T2.at(tup).values[pt];
                        tup[0] = b;
                        tup[1] = knu;
                        double backward = T2.at(tup).values[pt];
                        v += sign_nu * w * (forward - backward);
                    }
                }
            }
            out.coeffs[K].values[pt] = v;
        }
    }
    return out;
}

PerturbationOperator::PerturbationOperator(const ChartMetric& metric, int p)
    : p_(p), n_(metric.dim()), box_(metric.domain()) {
    D_ = (int)form_indices(n_, p).size();
    a_.assign(n_ * n_, GridFunction(box_));
    B_.assign(n_, std::vector<GridFunction>(D_ * D_, GridFunction(box_)));
    C_.assign(D_ * D_, GridFunction(box_));
    a_sum_ = GridFunction(box_);
    lower_sum_ = GridFunction(box_);

    for (std::size_t pt = 0; pt < box_.size(); ++pt) {
        auto y = box_.point(pt);
        HodgeCoeffs hc = hodge_coefficients(metric, p, y);
        double asum = 0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double aij = hc.ginv(i, j) - (i == j ? 1.0 : 0.0);
                a_[i * n_ + j].values[pt] = aij;
                asum += std::abs(aij);
            }
        a_sum_.values[pt] = asum;
        Eigen::MatrixXd C = hc.C();
        double lower = 0;
        for (int K = 0; K < D_; ++K) {
            double row = 0;
            for (int M = 0; M < D_; ++M) {
                for (int c = 0; c < n_; ++c) {
                    B_[c][K * D_ + M].values[pt] = hc.B[c](K, M);
                    row += std::abs(hc.B[c](K, M));
                }
                C_[K * D_ + M].values[pt] = C(K, M);
                row += std::abs(C(K, M));
            }
            lower = std::max(lower, row);
        }
        lower_sum_.values[pt] = lower;
    }
}

void PerturbationOperator::accumulate(FormField& out, int M,
                                      const std::vector<std::vector<GridFunction>>& d2,
                                      const std::vector<GridFunction>& d1,
                                      const GridFunction& d0) const {
    for (int K = 0; K < D_; ++K) {
        GridFunction& dst = out.coeffs[K];
        for (std::size_t pt = 0; pt < dst.size(); ++pt) {
            double v = 0;
            if (K == M) {
                // second order: -(g^{ab} - δ^{ab}) ∂²_{ab}
                for (int a = 0; a < n_; ++a)
                    for (int b = 0; b < n_; ++b)
                        v -= a_[a * n_ + b].values[pt] * d2[a][b].values[pt];
            }
            for (int c = 0; c < n_; ++c) v += B_[c][K * D_ + M].values[pt] * d1[c].values[pt];
            v += C_[K * D_ + M].values[pt] * d0.values[pt];
            dst.values[pt] += v;
        }
    }
}

FormField PerturbationOperator::apply(const FormField& u) const {
    if (!box_.same_layout(u.box)) throw std::invalid_argument("PerturbationOperator: grid mismatch");
    FormField out(p_, box_);
    for (int M = 0; M < D_; ++M) {
        std::vector<GridFunction> d1;
        d1.reserve(n_);
        for (int a = 0; a < n_; ++a) d1.push_back(finite_difference(u.coeffs[M], a, 1));
        std::vector<std::vector<GridFunction>> d2(n_, std::vector<GridFunction>(n_, GridFunction(box_)));
        for (int a = 0; a < n_; ++a) {
            d2[a][a] = finite_difference(u.coeffs[M], a, 2);
            for (int b = a + 1; b < n_; ++b) {
                d2[a][b] = finite_difference(d1[a], b, 1);
                d2[b][a] = d2[a][b];
            }
        }
        accumulate(out, M, d2, d1, u.coeffs[M]);
    }
    return out;
}

PerturbationResult perturbation_apply(const PerturbationOperator& Y, const ChartMetric& metric,
                                      const AdmissibleBall& ball, const FormField& u) {
    int alpha = u.degree == 0 ? 1 : 2;
    if (ball.order_m < alpha)
        throw std::invalid_argument(
            "perturbation_apply: ball admissibility order below alpha = " + std::to_string(alpha));
    AdmissibilityReport adm =
        is_admissible(metric, ball.center, ball.radius, ball.order_m, ball.epsilon);
    if (!adm.admissible)
        throw std::invalid_argument("perturbation_apply: ball is not admissible");

    PerturbationResult res{Y.apply(u), {}};
    res.coeffs.alpha = alpha;
    auto pts = points_in_ball(metric.domain(), ball.center, ball.radius);
    for (std::size_t p : pts) {
        res.coeffs.sup_a_sum = std::max(res.coeffs.sup_a_sum, Y.a_sum_at(p));
        res.coeffs.sup_lower_sum = std::max(res.coeffs.sup_lower_sum, Y.lower_order_sum_at(p));
    }
    res.coeffs.a_bound_ok = res.coeffs.sup_a_sum <= ball.epsilon + 1e-12;
    double scale = ball.epsilon * std::pow(ball.radius, -alpha);
    res.coeffs.needed_c = scale > 0 ? res.coeffs.sup_lower_sum / scale : 0.0;
    return res;
}

PerturbationResult perturbation_apply(const ChartMetric& metric, const AdmissibleBall& ball,
                                      const FormField& u) {
    PerturbationOperator Y(metric, u.degree);
    return perturbation_apply(Y, metric, ball, u);
}

} // namespace heatforms
