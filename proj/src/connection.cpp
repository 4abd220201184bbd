#include "heatforms/connection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace heatforms {

namespace {

// splits of beta into two ordered parts with binomial weights
void enumerate_pairs(const MultiIndex& beta,
                     const std::function<void(const MultiIndex&, const MultiIndex&, double)>& visit) {
    int n = (int)beta.size();
    MultiIndex b1(n, 0), b2(n, 0);
    std::function<void(int, double)> rec = [&](int axis, double w) {
        if (axis == n) {
            visit(b1, b2, w);
            return;
        }
        int total = beta[axis];
        for (int k = 0; k <= total; ++k) {
            b1[axis] = k;
            b2[axis] = total - k;
            double bc = std::tgamma(total + 1.0) /
                        (std::tgamma(k + 1.0) * std::tgamma(total - k + 1.0));
            rec(axis + 1, w * bc);
        }
    };
    rec(0, 1.0);
}

} // namespace

ChristoffelDerivs::ChristoffelDerivs(const ChartMetric& metric, const std::vector<double>& y,
                                     int order)
    : n_(metric.dim()), order_(order) {
    if (order < 0) throw std::invalid_argument("christoffel: derivative order must be >= 0");
    sigmas_ = enumerate_multi_indices(n_, order);
    values_.assign(sigmas_.size() * n_ * n_ * n_, 0.0);

    for (std::size_t s = 0; s < sigmas_.size(); ++s) {
        const MultiIndex& sigma = sigmas_[s];
        // ∂^σ Γ^i_{kj} = ½ Σ_{σ1+σ2=σ} C(σ,σ1) ∂^{σ1}g^{il} ∂^{σ2}(∂_j g_{kl} + ∂_k g_{lj} - ∂_l g_{jk})
        enumerate_pairs(sigma, [&](const MultiIndex& s1, const MultiIndex& s2, double w) {
            Eigen::MatrixXd ginv = metric.inverse_derivative(y, s1);
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < n_; ++k)
                    for (int j = 0; j < n_; ++j) {
                        double sum = 0;
                        for (int l = 0; l < n_; ++l) {
                            MultiIndex bj = s2, bk = s2, bl = s2;
                            bj[j] += 1;
                            bk[k] += 1;
                            bl[l] += 1;
                            double grad3 = metric.component(k, l, y, bj) +
                                           metric.component(l, j, y, bk) -
                                           metric.component(j, k, y, bl);
                            sum += ginv(i, l) * grad3;
                        }
                        values_[((s * n_ + i) * n_ + k) * n_ + j] += 0.5 * w * sum;
                    }
        });
    }
}

double ChristoffelDerivs::entry(int s, int i, int k, int j) const {
    return values_[((std::size_t(s) * n_ + i) * n_ + k) * n_ + j];
}

double ChristoffelDerivs::gamma(int i, int k, int j) const { return entry(0, i, k, j); }

double ChristoffelDerivs::dgamma(const MultiIndex& sigma, int i, int k, int j) const {
    for (std::size_t s = 0; s < sigmas_.size(); ++s)
        if (sigmas_[s] == sigma) return entry((int)s, i, k, j);
    throw std::invalid_argument("christoffel: derivative order not computed");
}

double ChristoffelDerivs::derivative_sup(int d) const {
    double sup = 0;
    for (std::size_t s = 0; s < sigmas_.size(); ++s) {
        if (order_of(sigmas_[s]) != d) continue;
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k)
                for (int j = 0; j < n_; ++j) sup = std::max(sup, std::abs(entry((int)s, i, k, j)));
    }
    return sup;
}

ChristoffelDerivs christoffel(const ChartMetric& metric, const std::vector<double>& y, int order) {
    return ChristoffelDerivs(metric, y, order);
}

ChristoffelGrid::ChristoffelGrid(const ChartMetric& metric) : n_(metric.dim()) {
    const GridBox& box = metric.domain();
    values_.assign(box.size() * n_ * n_ * n_, 0.0);
    for (std::size_t p = 0; p < box.size(); ++p) {
        ChristoffelDerivs cd(metric, box.point(p), 0);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k)
                    values_[((p * (std::size_t)n_ + i) * n_ + j) * n_ + k] = cd.gamma(i, j, k);
    }
}

TensorField covariant_derivative_step(const TensorField& T, const ChristoffelGrid* chris) {
    const GridBox& box = T.box;
    int n = box.n;
    TensorField out(box, T.rank + 1);

    // plain derivative part: out_{a,I} = ∂_a T_I
    std::vector<std::vector<GridFunction>> dT(T.comp.size());
    for (std::size_t c = 0; c < T.comp.size(); ++c) {
        dT[c].reserve(n);
        for (int a = 0; a < n; ++a) dT[c].push_back(finite_difference(T.comp[c], a, 1));
    }

    std::vector<int> idx(T.rank + 1);
    for (std::size_t oc = 0; oc < out.comp.size(); ++oc) {
        std::size_t rest = oc;
        for (int k = T.rank; k >= 0; --k) {
            idx[k] = (int)(rest % n);
            rest /= n;
        }
        int a = idx[0];
        std::vector<int> inner(idx.begin() + 1, idx.end());
        GridFunction& dst = out.comp[oc];
        dst = dT[T.flat(inner)][a];
        if (!chris) continue;
        // -Σ_ν Γ^k_{a i_ν} T_{I[ν→k]}
        for (int nu = 0; nu < T.rank; ++nu) {
            int inu = inner[nu];
            for (int k = 0; k < n; ++k) {
                std::vector<int> rep = inner;
                rep[nu] = k;
                const GridFunction& src = T.comp[T.flat(rep)];
                for (std::size_t p = 0; p < dst.size(); ++p)
                    dst.values[p] -= chris->gamma(p, k, a, inu) * src.values[p];
            }
        }
    }
    return out;
}

TensorField covariant_derivative(const ChartMetric& metric, const FormField& u, int k) {
    if (k < 0) throw std::invalid_argument("covariant_derivative: k must be >= 0");
    TensorField T = form_to_tensor(u);
    if (k == 0) return T;
    ChristoffelGrid chris(metric);
    for (int step = 0; step < k; ++step) T = covariant_derivative_step(T, &chris);
    return T;
}

TensorField covariant_derivative(const ChristoffelGrid& chris, const FormField& u, int k) {
    if (k < 0) throw std::invalid_argument("covariant_derivative: k must be >= 0");
    TensorField T = form_to_tensor(u);
    for (int step = 0; step < k; ++step) T = covariant_derivative_step(T, &chris);
    return T;
}

TensorField euclidean_derivative_tensor(const FormField& u, int k) {
    TensorField T = form_to_tensor(u);
    for (int step = 0; step < k; ++step) T = covariant_derivative_step(T, nullptr);
    return T;
}

GridFunction tensor_modulus(const ChartMetric* metric, const TensorField& T, int form_rank) {
    const GridBox& box = T.box;
    int n = box.n, q = T.rank;
    GridFunction out(box);
    double pfact = std::tgamma(form_rank + 1.0);

    std::vector<std::vector<int>> tuples(T.comp.size(), std::vector<int>(q));
    for (std::size_t c = 0; c < T.comp.size(); ++c) {
        std::size_t rest = c;
        for (int k = q - 1; k >= 0; --k) {
            tuples[c][k] = (int)(rest % n);
            rest /= n;
        }
    }

    for (std::size_t p = 0; p < box.size(); ++p) {
        Eigen::MatrixXd ginv = metric ? metric->inverse(box.point(p))
                                      : Eigen::MatrixXd::Identity(n, n);
        double s = 0;
        for (std::size_t c1 = 0; c1 < T.comp.size(); ++c1) {
            double v1 = T.comp[c1].values[p];
            if (v1 == 0) continue;
            for (std::size_t c2 = 0; c2 < T.comp.size(); ++c2) {
                double v2 = T.comp[c2].values[p];
                if (v2 == 0) continue;
                double w = 1;
                for (int k = 0; k < q; ++k) w *= ginv(tuples[c1][k], tuples[c2][k]);
                if (w != 0) s += w * v1 * v2;
            }
        }
        out.values[p] = std::sqrt(std::max(s / pfact, 0.0));
    }
    return out;
}

Eigen::MatrixXd ricci_tensor(const ChartMetric& metric, const std::vector<double>& y) {
    int n = metric.dim();
    ChristoffelDerivs cd(metric, y, 1);
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = 0;
            for (int k = 0; k < n; ++k) {
                MultiIndex ek(n, 0), ej(n, 0);
                ek[k] = 1;
                ej[j] = 1;
                v += cd.dgamma(ek, k, i, j); // ∂_k Γ^k_{ij}
                v -= cd.dgamma(ej, k, k, i); // ∂_j Γ^k_{ki}
                for (int l = 0; l < n; ++l) {
                    v += cd.gamma(k, k, l) * cd.gamma(l, i, j);
                    v -= cd.gamma(k, j, l) * cd.gamma(l, k, i);
                }
            }
            ric(i, j) = v;
        }
    return ric;
}

GridFunction ricci_derivative_modulus(const ChartMetric& metric, int j) {
    if (j < 0) throw std::invalid_argument("ricci: derivative order must be >= 0");
    const GridBox& box = metric.domain();
    int n = box.n;
    TensorField rc(box, 2);
    for (std::size_t p = 0; p < box.size(); ++p) {
        Eigen::MatrixXd r = ricci_tensor(metric, box.point(p));
        std::vector<int> idx(2);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                idx[0] = a;
                idx[1] = b;
                rc.at(idx).values[p] = r(a, b);
            }
    }
    if (j > 0) {
        ChristoffelGrid chris(metric);
        for (int step = 0; step < j; ++step) rc = covariant_derivative_step(rc, &chris);
    }
    return tensor_modulus(&metric, rc, 0);
}

double ball_lr_norm(const GridFunction& f, const std::vector<std::size_t>& points, double r,
                    const GridFunction* sqrt_det) {
    if (std::isinf(r)) {
        double m = 0;
        for (std::size_t p : points) m = std::max(m, std::abs(f.values[p]));
        return m;
    }
    double s = 0;
    for (std::size_t p : points) {
        double w = sqrt_det ? sqrt_det->values[p] : 1.0;
        s += std::pow(std::abs(f.values[p]), r) * w;
    }
    return std::pow(s * f.box.cell_volume(), 1.0 / r);
}

int required_admissible_order(int p, int k) {
    return p == 0 ? std::max(k - 1, 1) : std::max(k, 2);
}

SobolevCompareReport sobolev_compare(const ChartMetric& metric, const FormField& u,
                                     const AdmissibleBall& ball, int k, double r,
                                     double forward_c, double reverse_c) {
    int beta = required_admissible_order(u.degree, k);
    if (ball.order_m < beta)
        throw std::invalid_argument("sobolev_compare: ball admissibility order " +
                                    std::to_string(ball.order_m) + " below required beta = " +
                                    std::to_string(beta));
    AdmissibilityReport adm = is_admissible(metric, ball.center, ball.radius, ball.order_m,
                                            ball.epsilon);
    if (!adm.admissible)
        throw std::invalid_argument("sobolev_compare: ball is not admissible at the given order");

    const GridBox& box = metric.domain();
    double R = ball.radius, eps = ball.epsilon;
    auto ball_pts = points_in_ball(box, ball.center, R);
    auto outer_pts = points_in_ball(box, ball.center, (1 + eps) * R);
    auto inner_pts = points_in_ball(box, ball.center, (1 - eps) * R);

    GridFunction sdet(box);
    for (std::size_t p = 0; p < box.size(); ++p) sdet.values[p] = metric.sqrt_det(box.point(p));

    SobolevCompareReport rep;
    rep.required_order = beta;

    // forward: ‖∇^k u‖ on the metric ball vs plain derivatives on the dilate
    TensorField cov = covariant_derivative(metric, u, k);
    GridFunction cov_mod = tensor_modulus(&metric, cov, u.degree);
    rep.lhs = ball_lr_norm(cov_mod, ball_pts, r, &sdet);

    TensorField lead = euclidean_derivative_tensor(u, k);
    GridFunction lead_mod = tensor_modulus(nullptr, lead, u.degree);
    rep.rhs_leading = ball_lr_norm(lead_mod, outer_pts, r);

    int jmin = (u.degree == 0) ? 1 : 0;
    for (int j = jmin; j < k; ++j) {
        TensorField dj = euclidean_derivative_tensor(u, j);
        GridFunction dj_mod = tensor_modulus(nullptr, dj, u.degree);
        rep.correction_sum += ball_lr_norm(dj_mod, outer_pts, r);
    }
    double unit = eps * std::pow(R, -k) * rep.correction_sum;
    if (rep.lhs > rep.rhs_leading)
        rep.needed_forward_c = unit > 0 ? (rep.lhs - rep.rhs_leading) / unit
                                        : std::numeric_limits<double>::infinity();
    rep.forward_margin = rep.rhs_leading + forward_c * unit - rep.lhs;

    // reverse: ‖v‖_{W^{k,r}} on the shrunk Euclidean ball vs R^{-k} ‖u‖_{W^{k,r}(B)}
    double wv = 0, wu = 0;
    for (int j = 0; j <= k; ++j) {
        TensorField dj = euclidean_derivative_tensor(u, j);
        wv += ball_lr_norm(tensor_modulus(nullptr, dj, u.degree), inner_pts, r);
        TensorField cj = covariant_derivative(metric, u, j);
        wu += ball_lr_norm(tensor_modulus(&metric, cj, u.degree), ball_pts, r, &sdet);
    }
    rep.reverse_lhs = wv;
    rep.reverse_rhs = std::pow(R, -k) * wu;
    rep.needed_reverse_c = rep.reverse_rhs > 0 ? rep.reverse_lhs / rep.reverse_rhs : 0.0;
    rep.reverse_margin = reverse_c * rep.reverse_rhs - rep.reverse_lhs;

    // pointwise bound (SC22) for first derivatives of p-forms; compared in
    // the Euclidean modulus so the needed constant reflects the Christoffel
    // size alone (condition (1) handles the g-vs-δ modulus factor)
    if (k == 1 && u.degree >= 1) {
        TensorField cov1 = covariant_derivative(metric, u, 1);
        GridFunction lhs1 = tensor_modulus(nullptr, cov1, u.degree);
        TensorField d1 = euclidean_derivative_tensor(u, 1);
        GridFunction rhs1 = tensor_modulus(nullptr, d1, u.degree);
        GridFunction v0 = tensor_modulus(nullptr, form_to_tensor(u), u.degree);
        for (std::size_t p : ball_pts) {
            double denom = eps / R * v0.values[p];
            double over = lhs1.values[p] - rhs1.values[p];
            if (over > 0 && denom > 0)
                rep.pointwise_needed_c = std::max(rep.pointwise_needed_c, over / denom);
        }
    }
    return rep;
}

} // namespace heatforms
