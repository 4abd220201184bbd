#include "heatforms/form_field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace heatforms {

std::vector<FormIndex> form_indices(int n, int p) {
    if (p < 0 || p > n) throw std::invalid_argument("form_indices: need 0 <= p <= n");
    std::vector<FormIndex> out;
    FormIndex cur;
    std::function<void(int)> rec = [&](int start) {
        if ((int)cur.size() == p) {
            out.push_back(cur);
            return;
        }
        for (int a = start; a < n; ++a) {
            cur.push_back(a);
            rec(a + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

AntisymLookup antisym_lookup(int n, const FormIndex& idx) {
    AntisymLookup res;
    FormIndex sorted = idx;
    // bubble sort, counting transpositions
    int swaps = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            if (sorted[i] == sorted[j]) return res; // repeated index: zero
            if (sorted[i] > sorted[j]) {
                std::swap(sorted[i], sorted[j]);
                ++swaps;
            }
        }
    auto all = form_indices(n, (int)idx.size());
    for (std::size_t r = 0; r < all.size(); ++r)
        if (all[r] == sorted) {
            res.rank = (int)r;
            res.sign = (swaps % 2 == 0) ? 1 : -1;
            return res;
        }
    throw std::logic_error("antisym_lookup: tuple not found");
}

FormField::FormField(int p, GridBox b) : degree(p), box(std::move(b)) {
    coeffs.assign(form_indices(box.n, p).size(), GridFunction(box));
}

double FormField::value_at(const FormIndex& idx, std::size_t point) const {
    AntisymLookup l = antisym_lookup(box.n, idx);
    if (l.sign == 0) return 0.0;
    return l.sign * coeffs[l.rank].values[point];
}

void FormField::validate_finite() const {
    for (const auto& c : coeffs)
        for (double v : c.values)
            if (!std::isfinite(v)) throw std::domain_error("FormField: non-finite coefficient");
}

FormField& FormField::operator+=(const FormField& o) {
    for (std::size_t c = 0; c < coeffs.size(); ++c) coeffs[c] += o.coeffs[c];
    return *this;
}
FormField& FormField::operator-=(const FormField& o) {
    for (std::size_t c = 0; c < coeffs.size(); ++c) coeffs[c] -= o.coeffs[c];
    return *this;
}
FormField& FormField::operator*=(double s) {
    for (auto& c : coeffs) c *= s;
    return *this;
}

double FormField::max_abs() const {
    double m = 0;
    for (const auto& c : coeffs) m = std::max(m, c.max_abs());
    return m;
}

TensorField::TensorField(GridBox b, int r) : box(std::move(b)), rank(r) {
    std::size_t count = 1;
    for (int i = 0; i < r; ++i) count *= (std::size_t)box.n;
    comp.assign(count, GridFunction(box));
}

std::size_t TensorField::flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int k = 0; k < rank; ++k) f = f * box.n + (std::size_t)idx[k];
    return f;
}

TensorField form_to_tensor(const FormField& u) {
    TensorField T(u.box, u.degree);
    int n = u.box.n;
    std::vector<int> idx(u.degree, 0);
    std::size_t count = T.comp.size();
    for (std::size_t c = 0; c < count; ++c) {
        // decode tuple
        std::size_t rest = c;
        for (int k = u.degree - 1; k >= 0; --k) {
            idx[k] = (int)(rest % n);
            rest /= n;
        }
        AntisymLookup l = antisym_lookup(n, idx);
        if (l.sign == 0) continue;
        GridFunction& dst = T.comp[c];
        const GridFunction& src = u.coeffs[l.rank];
        for (std::size_t p = 0; p < dst.size(); ++p) dst.values[p] = l.sign * src.values[p];
    }
    return T;
}

} // namespace heatforms
