#include "heatforms/duhamel.hpp"

#include <cmath>

#include "heatforms/quadrature.hpp"

namespace heatforms {

double SeriesConfig::ratio(double t, int gamma_order) const {
    double coef = ratio_coefficient > 0 ? ratio_coefficient
                                        : std::pow(delta, 1.0 + gamma_order / 2.0);
    if (t < 1.0) return coef * std::pow(t, -1.0 - gamma_order / 2.0);
    return coef * std::pow(t, -(1.0 + gamma_order) / 2.0);
}

double tail_bound(const SeriesConfig& cfg, double t, int gamma_order,
                  double first_omitted_norm) {
    if (t <= 0) throw std::invalid_argument("tail_bound: t must be positive");
    double rho = cfg.ratio(t, gamma_order);
    if (rho >= 1)
        throw SeriesDivergence("series not convergent at this (epsilon, t, gamma)");
    return first_omitted_norm / (1.0 - rho);
}

FormField time_convolve(const TimeOperator& A, const TimeOperator& B, double t,
                        const FormField& input, int nodes) {
    if (t <= 0) throw std::invalid_argument("time_convolve: t must be positive");
    auto [xs, ws] = gl_nodes_on(0.0, t, nodes);
    FormField acc(input.degree, input.box);
    for (int q = 0; q < nodes; ++q) {
        FormField inner = B(xs[q], input);
        FormField outer = A(t - xs[q], inner);
        outer *= ws[q];
        acc += outer;
    }
    return acc;
}

namespace {

double form_l2(const FormField& u) {
    double s = 0;
    for (const auto& c : u.coeffs)
        for (double v : c.values) s += v * v;
    return std::sqrt(s * u.box.cell_volume());
}

// Below this multiple of h² the sampled kernel is unresolved; the semigroup
// is then applied as a mass-normalized sampled Gaussian, which is positive
// and ℓ¹-contractive (unconditionally stable) and tends to the identity as
// τ → 0. Above the threshold the exact quadrature kernel is used.
double resolved_time(const GridBox& box) {
    double h = 0;
    for (int a = 0; a < box.n; ++a) h = std::max(h, box.spacing(a));
    return h * h;
}

// separable pass with per-axis unit-mass Gaussian taps
GridFunction normalized_gaussian_smooth(const GridFunction& f, double tau) {
    const GridBox& box = f.box;
    GridFunction u = f;
    for (int axis = 0; axis < box.n; ++axis) {
        int N = box.npts[axis];
        double h = box.spacing(axis);
        std::vector<double> taps;
        if (box.periodic) {
            double L = box.length(axis);
            int images = (int)std::ceil(12.0 * std::sqrt(tau) / L) + 1;
            taps.assign(N, 0.0);
            for (int d = 0; d < N; ++d)
                for (int m = -images; m <= images; ++m)
                    taps[d] += kernel_factor_1d(0, d * h + m * L, tau) * h;
        } else {
            taps.assign(2 * N - 1, 0.0);
            for (int d = -(N - 1); d <= N - 1; ++d)
                taps[d + N - 1] = kernel_factor_1d(0, d * h, tau) * h;
        }
        double mass = 0;
        for (double v : taps) mass += v;
        if (mass > 0)
            for (double& v : taps) v /= mass;

        std::size_t stride = 1;
        for (int a = box.n - 1; a > axis; --a) stride *= (std::size_t)box.npts[a];
        std::size_t block = stride * (std::size_t)N;
        std::vector<double> line(N), out(N);
        for (std::size_t base = 0; base < u.size(); base += block)
            for (std::size_t off = 0; off < stride; ++off) {
                for (int i = 0; i < N; ++i) line[i] = u.values[base + off + (std::size_t)i * stride];
                for (int i = 0; i < N; ++i) {
                    double s = 0;
                    if (box.periodic) {
                        for (int j = 0; j < N; ++j) s += taps[(((i - j) % N) + N) % N] * line[j];
                    } else {
                        for (int j = 0; j < N; ++j) s += taps[i - j + N - 1] * line[j];
                    }
                    out[i] = s;
                }
                for (int i = 0; i < N; ++i) u.values[base + off + (std::size_t)i * stride] = out[i];
            }
    }
    return u;
}

GridFunction heat_smooth(const GridFunction& f, double tau, HeatApplyDiag* diag = nullptr) {
    if (tau >= resolved_time(f.box)) return heat_apply(f, tau, MultiIndex(f.box.n, 0), diag);
    return normalized_gaussian_smooth(f, tau);
}

// e^{-τΔ} componentwise
FormField heat_semigroup(const FormField& u, double tau, HeatApplyDiag* diag = nullptr) {
    FormField out(u.degree, u.box);
    for (int M = 0; M < u.components(); ++M) out.coeffs[M] = heat_smooth(u.coeffs[M], tau, diag);
    return out;
}

// Y e^{-τΔ} u; derivatives come from kernel-derivative convolutions when the
// kernel is resolved and from finite differences of the Taylor branch below.
FormField apply_Y_heat(const PerturbationOperator& Y, const FormField& u, double tau) {
    const GridBox& box = u.box;
    int n = box.n;
    bool resolved = tau >= resolved_time(box);
    FormField out(u.degree, box);
    for (int M = 0; M < u.components(); ++M) {
        GridFunction d0(box);
        std::vector<GridFunction> d1;
        std::vector<std::vector<GridFunction>> d2(n, std::vector<GridFunction>(n, GridFunction(box)));
        if (resolved) {
            d0 = heat_apply(u.coeffs[M], tau, MultiIndex(box.n, 0));
            d1.reserve(n);
            for (int a = 0; a < n; ++a) {
                MultiIndex ga(box.n, 0);
                ga[a] = 1;
                d1.push_back(heat_apply(u.coeffs[M], tau, ga));
            }
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    MultiIndex gab(box.n, 0);
                    gab[a] += 1;
                    gab[b] += 1;
                    d2[a][b] = heat_apply(u.coeffs[M], tau, gab);
                    if (b != a) d2[b][a] = d2[a][b];
                }
        } else {
            d0 = heat_smooth(u.coeffs[M], tau);
            d1.reserve(n);
            for (int a = 0; a < n; ++a) d1.push_back(finite_difference(d0, a, 1));
            for (int a = 0; a < n; ++a) {
                d2[a][a] = finite_difference(d0, a, 2);
                for (int b = a + 1; b < n; ++b) {
                    d2[a][b] = finite_difference(d1[a], b, 1);
                    d2[b][a] = d2[a][b];
                }
            }
        }
        Y.accumulate(out, M, d2, d1, d0);
    }
    return out;
}

// (Y e^{-tΔ})^{*j} ω at time s, by recursive open-node quadrature
FormField series_kernel(const PerturbationOperator& Y, const FormField& omega, double s, int j,
                        int nodes) {
    if (j == 1) return apply_Y_heat(Y, omega, s);
    auto [xs, ws] = gl_nodes_on(0.0, s, nodes);
    FormField acc(omega.degree, omega.box);
    for (int q = 0; q < nodes; ++q) {
        FormField inner = series_kernel(Y, omega, xs[q], j - 1, nodes);
        FormField term = apply_Y_heat(Y, inner, s - xs[q]);
        term *= ws[q];
        acc += term;
    }
    return acc;
}

} // namespace

DuhamelResult duhamel_solve(const PerturbationOperator& Y, const AdmissibleBall& ball,
                            const FormField& omega, double t, const SeriesConfig& cfg) {
    if (t <= 0) throw std::invalid_argument("duhamel_solve: t must be positive");
    int alpha = omega.degree == 0 ? 1 : 2;
    if (ball.order_m < alpha)
        throw std::invalid_argument("duhamel_solve: ball admissibility order below alpha = " +
                                    std::to_string(alpha));
    double rho = cfg.ratio(t, 0);
    if (rho >= 1) throw SeriesDivergence("series not convergent at this (epsilon, t, gamma)");

    DuhamelResult res;
    res.u = heat_semigroup(omega, t, &res.heat_diag);
    res.term_l2_norms.push_back(form_l2(res.u));

    double sign = -1.0;
    for (int j = 1; j <= cfg.truncation_order; ++j) {
        // term_j = (-1)^j ∫_0^t e^{-(t-s)Δ} (Y e^{-sΔ})^{*j} ω ds
        auto [xs, ws] = gl_nodes_on(0.0, t, cfg.quad_nodes);
        FormField acc(omega.degree, omega.box);
        for (int q = 0; q < cfg.quad_nodes; ++q) {
            FormField inner = series_kernel(Y, omega, xs[q], j, cfg.quad_nodes);
            FormField term = heat_semigroup(inner, t - xs[q]);
            term *= ws[q];
            acc += term;
        }
        acc *= sign;
        res.term_l2_norms.push_back(form_l2(acc));
        res.u += acc;
        sign = -sign;
    }

    std::size_t J = res.term_l2_norms.size() - 1;
    if (J >= 1 && res.term_l2_norms[J - 1] > 0)
        res.measured_ratio = res.term_l2_norms[J] / res.term_l2_norms[J - 1];
    double r = res.measured_ratio;
    if (r > 0 && r < 1) res.tail_estimate = res.term_l2_norms[J] * r / (1 - r);
    else res.tail_estimate = res.term_l2_norms[J]; // flat collapse or stalled ratio
    return res;
}

DuhamelResult duhamel_solve(const ChartMetric& metric, const AdmissibleBall& ball,
                            const FormField& omega, double t, const SeriesConfig& cfg) {
    AdmissibilityReport adm =
        is_admissible(metric, ball.center, ball.radius, ball.order_m, ball.epsilon);
    if (!adm.admissible) throw std::invalid_argument("duhamel_solve: ball is not admissible");
    PerturbationOperator Y(metric, omega.degree);
    return duhamel_solve(Y, ball, omega, t, cfg);
}

DirectSolver::DirectSolver(const DiscreteOperator& op) : op_(&op) {
    spectral_ = op.dofs() <= kSpectralDofLimit;
    if (!spectral_) return;
    Eigen::MatrixXd A = Eigen::MatrixXd(op.quadratic);
    A = 0.5 * (A + A.transpose()); // harden against roundoff asymmetry
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (std::size_t pt = 0; pt < op.box.size(); ++pt)
        for (int K = 0; K < op.D; ++K)
            for (int L = 0; L < op.D; ++L)
                M((Eigen::Index)op.dof(K, pt), (Eigen::Index)op.dof(L, pt)) =
                    op.mass_blocks[pt](K, L);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("DirectSolver: eigendecomposition failed");
    eigvals_ = es.eigenvalues();
    eigvecs_ = es.eigenvectors(); // VᵀMV = I
}

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& omega, double t) const {
    if ((std::size_t)omega.size() != op_->dofs())
        throw std::invalid_argument("direct_solve: dimension mismatch");
    if (t < 0) throw std::invalid_argument("direct_solve: t must be >= 0");
    if (t == 0) return omega;
    if (spectral_) {
        Eigen::VectorXd coef = eigvecs_.transpose() * op_->apply_mass(omega);
        for (Eigen::Index i = 0; i < coef.size(); ++i) coef[i] *= std::exp(-eigvals_[i] * t);
        return eigvecs_ * coef;
    }
    // matrix-free fallback: uniform substeps with truncated Taylor of e^{-τL}
    double lest = 8.0 / (op_->h * op_->h) * op_->D; // crude spectral radius bound
    int steps = std::max(1, (int)std::ceil(t * lest / 8.0));
    double tau = t / steps;
    Eigen::VectorXd u = omega;
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXd term = u, acc = u;
        for (int k = 1; k <= 24; ++k) {
            term = op_->apply(term) * (-tau / k);
            acc += term;
            if (term.cwiseAbs().maxCoeff() < 1e-16 * acc.cwiseAbs().maxCoeff()) break;
        }
        u = acc;
    }
    return u;
}

FormField DirectSolver::solve(const FormField& omega, double t) const {
    return op_->to_form(solve(op_->to_vector(omega), t));
}

double DirectSolver::min_eigenvalue() const {
    if (!spectral_) throw std::runtime_error("min_eigenvalue: spectral path unavailable");
    return eigvals_.minCoeff();
}

Eigen::VectorXd DirectSolver::eigen_coefficients(const Eigen::VectorXd& v) const {
    return eigvecs_.transpose() * op_->apply_mass(v);
}

FormField direct_solve(const DiscreteOperator& op, const FormField& omega, double t) {
    DirectSolver solver(op);
    return solver.solve(omega, t);
}

} // namespace heatforms
