#include "heatforms/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heatforms/fitting.hpp"
#include "heatforms/quadrature.hpp"

namespace heatforms {

namespace {

constexpr double kBoxWidths = 12.0; // box half-width in units of √t
constexpr double kMassWarnThreshold = 1e-10;

void validate_query(const KernelQuery& q) {
    if (q.n < 1) throw std::invalid_argument("kernel_eval: dimension must be >= 1");
    if ((int)q.x.size() != q.n || (int)q.gamma.size() != q.n)
        throw std::invalid_argument("kernel_eval: x and gamma must have length n");
    if (!std::isfinite(q.t)) throw std::invalid_argument("kernel_eval: non-finite t");
    for (double xi : q.x)
        if (!std::isfinite(xi)) throw std::invalid_argument("kernel_eval: non-finite x");
    order_of(q.gamma);
}

double kernel_closed(const KernelQuery& q) {
    double v = 1.0;
    for (int i = 0; i < q.n; ++i) v *= kernel_factor_1d(q.gamma[i], q.x[i], q.t);
    return v;
}

} // namespace

double kernel_factor_1d(int order, double y, double t) {
    if (t <= 0) return 0;
    double phi = std::exp(-y * y / (4 * t)) / std::sqrt(4 * M_PI * t);
    switch (order) {
        case 0: return phi;
        case 1: return -y / (2 * t) * phi;
        case 2: return (-1 / (2 * t) + y * y / (4 * t * t)) * phi;
        default: {
            // nested central differences, 4th order
            double h = std::max(1e-4, 1e-3 * std::sqrt(t));
            auto f = [&](double z) { return kernel_factor_1d(order - 1, z, t); };
            return (-f(y + 2 * h) + 8 * f(y + h) - 8 * f(y - h) + f(y - 2 * h)) / (12 * h);
        }
    }
}

double kernel_eval(const KernelQuery& q) {
    validate_query(q);
    if (q.t <= 0) return 0.0;
    if (order_of(q.gamma) <= 2) return kernel_closed(q);

    // reduce the largest axis order by one with a 4th-order stencil
    int axis = 0;
    for (int i = 1; i < q.n; ++i)
        if (q.gamma[i] > q.gamma[axis]) axis = i;
    double h = std::max(1e-4, 1e-3 * std::sqrt(q.t));
    KernelQuery sub = q;
    sub.gamma[axis] -= 1;
    auto f = [&](double step) {
        KernelQuery qq = sub;
        qq.x[axis] += step;
        return kernel_eval(qq);
    };
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

namespace {

// zeros of the per-axis kernel factor in (-B, B), by sign scan + bisection
std::vector<double> factor_zeros(int order, double t, double B) {
    std::vector<double> zs;
    const int scan = 4096;
    double prev = kernel_factor_1d(order, -B, t);
    for (int i = 1; i <= scan; ++i) {
        double y = -B + 2 * B * i / scan;
        double cur = kernel_factor_1d(order, y, t);
        if (prev == 0.0) zs.push_back(-B + 2 * B * (i - 1) / scan);
        else if (prev * cur < 0) {
            double a = -B + 2 * B * (i - 1) / scan, b = y;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (a + b);
                double fm = kernel_factor_1d(order, m, t);
                if (fm == 0) { a = b = m; break; }
                if (fm * prev < 0) b = m; else a = m;
            }
            zs.push_back(0.5 * (a + b));
        }
        prev = cur;
    }
    return zs;
}

// ∫ |∂^m φ|^r over ℝ by piecewise composite Gauss–Legendre
double factor_lr_integral(int order, double r, double t) {
    double B = kBoxWidths * std::sqrt(t);
    std::vector<double> cuts = factor_zeros(order, t, B);
    cuts.insert(cuts.begin(), -B);
    cuts.push_back(B);
    double s = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        s += gl_integrate_composite(
            [&](double y) { return std::pow(std::abs(kernel_factor_1d(order, y, t)), r); },
            cuts[i], cuts[i + 1], 24, 16);
    }
    return s;
}

// sup |∂^m φ| by grid scan plus one Newton refinement at the maximizer
double factor_sup(int order, double t) {
    double B = kBoxWidths * std::sqrt(t);
    const int scan = 4096;
    double best = 0, ybest = 0;
    for (int i = 0; i <= scan; ++i) {
        double y = -B + 2 * B * i / scan;
        double v = std::abs(kernel_factor_1d(order, y, t));
        if (v > best) { best = v; ybest = y; }
    }
    double d1 = kernel_factor_1d(order + 1, ybest, t);
    double d2 = kernel_factor_1d(order + 2, ybest, t);
    if (d2 != 0) {
        double yn = ybest - d1 / d2;
        if (std::abs(yn - ybest) < 4 * B / scan) {
            double v = std::abs(kernel_factor_1d(order, yn, t));
            if (v > best) best = v;
        }
    }
    return best;
}

double factor_norm_closed(int order, double r, double t) {
    if (std::isinf(r)) {
        if (order == 0) return 1.0 / std::sqrt(4 * M_PI * t);
        // maximizer of |y| e^{-y²/4t} at y = √(2t)
        return std::sqrt(2 * t) * std::exp(-0.5) / (2 * t * std::sqrt(4 * M_PI * t));
    }
    if (order == 0)
        return std::pow(4 * M_PI * t, -0.5 * (1 - 1 / r)) * std::pow(r, -1 / (2 * r));
    // ∫ |y/(2t)|^r φ^r dy = (2t)^{-r} (4πt)^{-r/2} Γ((r+1)/2) (4t/r)^{(r+1)/2}
    double log_int = -r * std::log(2 * t) - 0.5 * r * std::log(4 * M_PI * t) +
                     std::lgamma((r + 1) / 2) + 0.5 * (r + 1) * std::log(4 * t / r);
    return std::exp(log_int / r);
}

void validate_norm_args(int n, const MultiIndex& gamma, double r, double t) {
    if (n < 1) throw std::invalid_argument("kernel_lr_norm: dimension must be >= 1");
    if ((int)gamma.size() != n) throw std::invalid_argument("kernel_lr_norm: gamma length != n");
    if (t <= 0) throw std::invalid_argument("kernel_lr_norm: t must be positive");
    if (!std::isinf(r) && r < 1) throw std::invalid_argument("kernel_lr_norm: r must be in [1,inf]");
    order_of(gamma);
}

} // namespace

double kernel_lr_norm_quadrature(int n, const MultiIndex& gamma, double r, double t) {
    validate_norm_args(n, gamma, r, t);
    if (std::isinf(r)) {
        double s = 1.0;
        for (int i = 0; i < n; ++i) s *= factor_sup(gamma[i], t);
        return s;
    }
    // the kernel is a product over axes, so the box integral factorizes
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= factor_lr_integral(gamma[i], r, t);
    return std::pow(prod, 1.0 / r);
}

double kernel_lr_norm(int n, const MultiIndex& gamma, double r, double t) {
    validate_norm_args(n, gamma, r, t);
    if (order_of(gamma) <= 1) {
        double v = 1.0;
        for (int i = 0; i < n; ++i) v *= factor_norm_closed(gamma[i], r, t);
        return v;
    }
    return kernel_lr_norm_quadrature(n, gamma, r, t);
}

namespace {

// 1-D convolution tables: out[i] = Σ_j K[i - j] f[j] h, with kernel
// periodization when the box wraps.
struct AxisKernel {
    std::vector<double> taps; // indexed by (i - j) + (N-1) if not periodic, by (i-j) mod N if periodic
    int npts = 0;
    bool periodic = false;
};

AxisKernel build_axis_kernel(const GridBox& box, int axis, int order, double t) {
    AxisKernel k;
    k.npts = box.npts[axis];
    k.periodic = box.periodic;
    double h = box.spacing(axis);
    if (!box.periodic) {
        k.taps.resize(2 * k.npts - 1);
        for (int d = -(k.npts - 1); d <= k.npts - 1; ++d)
            k.taps[d + k.npts - 1] = kernel_factor_1d(order, d * h, t) * h;
    } else {
        double L = box.length(axis);
        int images = (int)std::ceil(kBoxWidths * std::sqrt(t) / L) + 1;
        k.taps.assign(k.npts, 0.0);
        for (int d = 0; d < k.npts; ++d)
            for (int m = -images; m <= images; ++m)
                k.taps[d] += kernel_factor_1d(order, d * h + m * L, t) * h;
    }
    return k;
}

void convolve_axis(GridFunction& f, int axis, const AxisKernel& k) {
    const GridBox& box = f.box;
    int N = box.npts[axis];
    std::size_t stride = 1;
    for (int a = box.n - 1; a > axis; --a) stride *= (std::size_t)box.npts[a];
    std::size_t block = stride * (std::size_t)N;
    std::vector<double> line(N), out(N);
    for (std::size_t base = 0; base < f.size(); base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
            for (int i = 0; i < N; ++i) line[i] = f.values[base + off + (std::size_t)i * stride];
            for (int i = 0; i < N; ++i) {
                double s = 0;
                if (k.periodic) {
                    for (int j = 0; j < N; ++j) {
                        int d = i - j;
                        d = ((d % N) + N) % N;
                        s += k.taps[d] * line[j];
                    }
                } else {
                    for (int j = 0; j < N; ++j) s += k.taps[i - j + N - 1] * line[j];
                }
                out[i] = s;
            }
            for (int i = 0; i < N; ++i) f.values[base + off + (std::size_t)i * stride] = out[i];
        }
    }
}

} // namespace

GridFunction heat_apply(const GridFunction& f, double t, const MultiIndex& gamma,
                        HeatApplyDiag* diag) {
    if (t <= 0) throw std::invalid_argument("heat_apply: t must be positive");
    if ((int)gamma.size() != f.box.n)
        throw std::invalid_argument("heat_apply: gamma length mismatch");
    GridFunction u = f;
    for (int a = 0; a < f.box.n; ++a) {
        AxisKernel k = build_axis_kernel(f.box, a, gamma[a], t);
        convolve_axis(u, a, k);
    }
    if (diag) {
        diag->max_truncated_mass = 0;
        diag->truncation_warning = false;
        if (!f.box.periodic) {
            // kernel mass retained by the box, seen from each source point
            // where f carries data; the retained fraction factorizes per axis
            std::vector<std::vector<double>> retained(f.box.n);
            for (int a = 0; a < f.box.n; ++a) {
                AxisKernel k0 = build_axis_kernel(f.box, a, 0, t);
                int N = f.box.npts[a];
                retained[a].assign(N, 0.0);
                for (int j = 0; j < N; ++j)
                    for (int i = 0; i < N; ++i) retained[a][j] += k0.taps[i - j + N - 1];
            }
            double thresh = 1e-14 * std::max(f.max_abs(), 1e-300);
            for (std::size_t j = 0; j < f.size(); ++j) {
                if (std::abs(f.values[j]) <= thresh) continue;
                auto idx = f.box.unflatten(j);
                double m = 1.0;
                for (int a = 0; a < f.box.n; ++a) m *= retained[a][idx[a]];
                diag->max_truncated_mass = std::max(diag->max_truncated_mass, 1.0 - m);
            }
            diag->truncation_warning = diag->max_truncated_mass > kMassWarnThreshold;
        }
    }
    return u;
}

GridFunction heat_apply(const GridFunction& f, double t, HeatApplyDiag* diag) {
    return heat_apply(f, t, MultiIndex(f.box.n, 0), diag);
}

GridFunction heat_apply_direct(const GridFunction& f, double t, const MultiIndex& gamma) {
    if (t <= 0) throw std::invalid_argument("heat_apply_direct: t must be positive");
    const GridBox& box = f.box;
    GridFunction u(box);
    double w = box.cell_volume();
    std::vector<int> images(box.n, 0);
    if (box.periodic)
        for (int a = 0; a < box.n; ++a)
            images[a] = (int)std::ceil(kBoxWidths * std::sqrt(t) / box.length(a)) + 1;

    for (std::size_t i = 0; i < u.size(); ++i) {
        auto xi = box.point(i);
        double s = 0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            auto yj = box.point(j);
            if (!box.periodic) {
                double v = 1.0;
                for (int a = 0; a < box.n; ++a)
                    v *= kernel_factor_1d(gamma[a], xi[a] - yj[a], t);
                s += v * f.values[j];
            } else {
                // sum over wrap images per axis
                double v = 1.0;
                for (int a = 0; a < box.n; ++a) {
                    double fa = 0, L = box.length(a);
                    for (int m = -images[a]; m <= images[a]; ++m)
                        fa += kernel_factor_1d(gamma[a], xi[a] - yj[a] + m * L, t);
                    v *= fa;
                }
                s += v * f.values[j];
            }
        }
        u.values[i] = s * w;
    }
    return u;
}

SmoothingCheckResult smoothing_bound_check(const std::vector<GridFunction>& corpus,
                                           double r, double s, const MultiIndex& gamma,
                                           const std::vector<double>& t_grid) {
    if (corpus.empty()) throw std::invalid_argument("smoothing_bound_check: empty corpus");
    if (s < r) throw std::invalid_argument("smoothing_bound_check: requires r <= s");
    bool any_nonzero = false;
    for (const auto& f : corpus)
        if (f.max_abs() > 0) any_nonzero = true;
    if (!any_nonzero) throw std::invalid_argument("smoothing_bound_check: all-zero corpus");
    double tmin = t_grid[0], tmax = t_grid[0];
    for (double t : t_grid) {
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    if (tmax / tmin < std::pow(10.0, 1.5))
        throw std::invalid_argument("smoothing_bound_check: t grid must span >= 1.5 decades");

    int n = corpus.front().box.n;
    SmoothingCheckResult res;
    res.bound.n = n;
    res.bound.r = r;
    res.bound.s = s;
    res.bound.gamma = gamma;
    double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
    double inv_s = std::isinf(s) ? 0.0 : 1.0 / s;
    res.bound.exponent = order_of(gamma) / 2.0 + 0.5 * n * (inv_r - inv_s);
    res.t_grid = t_grid;

    for (double t : t_grid) {
        double ratio = 0;
        for (const auto& f : corpus) {
            double den = lr_norm(f, r);
            if (den == 0) continue;
            GridFunction u = heat_apply(f, t, gamma);
            ratio = std::max(ratio, lr_norm(u, s) / den);
        }
        res.ratios.push_back(ratio);
        res.bound.constant = std::max(res.bound.constant, ratio * std::pow(t, res.bound.exponent));
    }
    ExponentFit fit = exponent_fit(res.t_grid, res.ratios);
    res.fitted_slope = fit.slope;
    res.fit_residual = fit.residual;
    res.pass = std::isfinite(res.bound.constant) &&
               res.fitted_slope <= -res.bound.exponent + 0.03;
    return res;
}

} // namespace heatforms
