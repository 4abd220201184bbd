#include "heatforms/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace heatforms {

GridBox::GridBox(int dim, std::vector<double> lo_, std::vector<double> hi_,
                 std::vector<int> npts_, bool periodic_)
    : n(dim), lo(std::move(lo_)), hi(std::move(hi_)), npts(std::move(npts_)),
      periodic(periodic_) {
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("GridBox: dimension out of range");
    if ((int)lo.size() != n || (int)hi.size() != n || (int)npts.size() != n)
        throw std::invalid_argument("GridBox: inconsistent field sizes");
    for (int a = 0; a < n; ++a) {
        if (!(hi[a] > lo[a])) throw std::invalid_argument("GridBox: hi <= lo");
        if (npts[a] < 2) throw std::invalid_argument("GridBox: need at least 2 points per axis");
    }
}

double GridBox::spacing(int axis) const {
    return periodic ? length(axis) / npts[axis] : length(axis) / (npts[axis] - 1);
}

std::size_t GridBox::size() const {
    std::size_t s = 1;
    for (int a = 0; a < n; ++a) s *= (std::size_t)npts[a];
    return s;
}

double GridBox::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < n; ++a) v *= spacing(a);
    return v;
}

std::vector<double> GridBox::point(std::size_t flat) const {
    auto idx = unflatten(flat);
    std::vector<double> x(n);
    for (int a = 0; a < n; ++a) x[a] = lo[a] + idx[a] * spacing(a);
    return x;
}

std::size_t GridBox::flat_index(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < n; ++a) f = f * npts[a] + (std::size_t)idx[a];
    return f;
}

std::vector<int> GridBox::unflatten(std::size_t flat) const {
    std::vector<int> idx(n);
    for (int a = n - 1; a >= 0; --a) {
        idx[a] = (int)(flat % npts[a]);
        flat /= npts[a];
    }
    return idx;
}

double GridBox::distance(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0;
    for (int ax = 0; ax < n; ++ax) {
        double d = std::abs(a[ax] - b[ax]);
        if (periodic) {
            double L = length(ax);
            d = std::fmod(d, L);
            d = std::min(d, L - d);
        }
        s += d * d;
    }
    return std::sqrt(s);
}

double GridBox::boundary_distance(const std::vector<double>& x) const {
    if (periodic) return std::numeric_limits<double>::infinity();
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) d = std::min({d, x[a] - lo[a], hi[a] - x[a]});
    return d;
}

bool GridBox::same_layout(const GridBox& o) const {
    return n == o.n && lo == o.lo && hi == o.hi && npts == o.npts && periodic == o.periodic;
}

GridFunction::GridFunction(GridBox b, std::function<double(const std::vector<double>&)> f)
    : box(std::move(b)), values(box.size()) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(box.point(i));
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}
GridFunction& GridFunction::operator-=(const GridFunction& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}
GridFunction& GridFunction::operator*=(double s) {
    for (double& v : values) v *= s;
    return *this;
}

double GridFunction::max_abs() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { a += b; return a; }
GridFunction operator-(GridFunction a, const GridFunction& b) { a -= b; return a; }
GridFunction operator*(double s, GridFunction a) { a *= s; return a; }

namespace {

// Index lines along `axis`: iterate over the complement, act on the line.
template <typename F>
void for_each_line(const GridBox& box, int axis, F&& body) {
    std::size_t total = box.size();
    int N = box.npts[axis];
    // stride of `axis` in the flat (row-major) layout
    std::size_t stride = 1;
    for (int a = box.n - 1; a > axis; --a) stride *= (std::size_t)box.npts[a];
    std::size_t block = stride * (std::size_t)N;
    for (std::size_t base = 0; base < total; base += block)
        for (std::size_t off = 0; off < stride; ++off) body(base + off, stride, N);
}

inline int wrap(int i, int N) { return ((i % N) + N) % N; }

} // namespace

GridFunction finite_difference(const GridFunction& f, int axis, int order) {
    if (order != 1 && order != 2)
        throw std::invalid_argument("finite_difference: order must be 1 or 2");
    const GridBox& box = f.box;
    double h = box.spacing(axis);
    GridFunction out(box);

    auto get = [&](std::size_t base, std::size_t stride, int N, int i) -> double {
        if (box.periodic) return f.values[base + (std::size_t)wrap(i, N) * stride];
        i = std::clamp(i, 0, N - 1);
        return f.values[base + (std::size_t)i * stride];
    };

    for_each_line(box, axis, [&](std::size_t base, std::size_t stride, int N) {
        for (int i = 0; i < N; ++i) {
            double v;
            bool interior4 = box.periodic || (i >= 2 && i <= N - 3);
            if (order == 1) {
                if (interior4) {
                    v = (-get(base, stride, N, i + 2) + 8 * get(base, stride, N, i + 1)
                         - 8 * get(base, stride, N, i - 1) + get(base, stride, N, i - 2)) / (12 * h);
                } else if (i == 0) {
                    v = (-3 * get(base, stride, N, 0) + 4 * get(base, stride, N, 1)
                         - get(base, stride, N, 2)) / (2 * h);
                } else if (i == N - 1) {
                    v = (3 * get(base, stride, N, N - 1) - 4 * get(base, stride, N, N - 2)
                         + get(base, stride, N, N - 3)) / (2 * h);
                } else {
                    v = (get(base, stride, N, i + 1) - get(base, stride, N, i - 1)) / (2 * h);
                }
            } else {
                if (interior4) {
                    v = (-get(base, stride, N, i + 2) + 16 * get(base, stride, N, i + 1)
                         - 30 * get(base, stride, N, i)
                         + 16 * get(base, stride, N, i - 1) - get(base, stride, N, i - 2)) / (12 * h * h);
                } else if (i == 0) {
                    v = (2 * get(base, stride, N, 0) - 5 * get(base, stride, N, 1)
                         + 4 * get(base, stride, N, 2) - get(base, stride, N, 3)) / (h * h);
                } else if (i == N - 1) {
                    v = (2 * get(base, stride, N, N - 1) - 5 * get(base, stride, N, N - 2)
                         + 4 * get(base, stride, N, N - 3) - get(base, stride, N, N - 4)) / (h * h);
                } else {
                    v = (get(base, stride, N, i + 1) - 2 * get(base, stride, N, i)
                         + get(base, stride, N, i - 1)) / (h * h);
                }
            }
            out.values[base + (std::size_t)i * stride] = v;
        }
    });
    return out;
}

GridFunction finite_difference(const GridFunction& f, const MultiIndex& gamma) {
    if ((int)gamma.size() != f.box.n)
        throw std::invalid_argument("finite_difference: multi-index rank mismatch");
    GridFunction cur = f;
    for (int a = 0; a < f.box.n; ++a) {
        int k = gamma[a];
        while (k >= 2) { cur = finite_difference(cur, a, 2); k -= 2; }
        if (k == 1) cur = finite_difference(cur, a, 1);
    }
    return cur;
}

std::vector<std::size_t> points_in_ball(const GridBox& box, const std::vector<double>& x,
                                        double R) {
    std::vector<std::size_t> out;
    std::vector<int> lo_i(box.n), len(box.n);
    for (int a = 0; a < box.n; ++a) {
        double h = box.spacing(a);
        int il = (int)std::ceil((x[a] - R - box.lo[a]) / h - 1e-12);
        int ih = (int)std::floor((x[a] + R - box.lo[a]) / h + 1e-12);
        if (box.periodic) {
            if (ih - il + 1 >= box.npts[a]) { il = 0; ih = box.npts[a] - 1; }
        } else {
            il = std::max(il, 0);
            ih = std::min(ih, box.npts[a] - 1);
        }
        lo_i[a] = il;
        len[a] = ih - il + 1;
        if (len[a] <= 0) return out;
    }
    std::vector<int> it(box.n, 0), idx(box.n);
    std::vector<double> p(box.n);
    for (;;) {
        for (int a = 0; a < box.n; ++a) {
            int i = lo_i[a] + it[a];
            idx[a] = box.periodic ? wrap(i, box.npts[a]) : i;
            p[a] = box.lo[a] + idx[a] * box.spacing(a);
        }
        if (box.distance(p, x) <= R + 1e-12) out.push_back(box.flat_index(idx));
        int a = box.n - 1;
        while (a >= 0 && ++it[a] == len[a]) it[a--] = 0;
        if (a < 0) break;
    }
    return out;
}

double grid_integral(const GridFunction& f) {
    double s = 0;
    for (double v : f.values) s += v;
    return s * f.box.cell_volume();
}

double lr_norm(const GridFunction& f, double r, const GridFunction* weight) {
    if (std::isinf(r)) return f.max_abs();
    if (r < 1) throw std::invalid_argument("lr_norm: r must be >= 1");
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double w = weight ? weight->values[i] : 1.0;
        s += std::pow(std::abs(f.values[i]), r) * w;
    }
    return std::pow(s * f.box.cell_volume(), 1.0 / r);
}

} // namespace heatforms
