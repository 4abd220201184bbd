#pragma once

#include <vector>

#include "heatforms/grid.hpp"

namespace heatforms {

/// Strictly increasing axis tuple indexing a p-form component.
using FormIndex = std::vector<int>;

/// All sorted index tuples of length p over n axes (binomial(n,p) of them).
std::vector<FormIndex> form_indices(int n, int p);

/// Sign and sorted position of an arbitrary index tuple; sign 0 on repeats.
struct AntisymLookup {
    int sign = 0;    // -1, 0, +1
    int rank = -1;   // position within form_indices(n,p)
};
AntisymLookup antisym_lookup(int n, const FormIndex& idx);

/// p-form on a chart grid: coefficients α_J stored on strictly increasing
/// index tuples, antisymmetry implied (signs derived on expansion).
struct FormField {
    int degree = 0;
    GridBox box;
    std::vector<GridFunction> coeffs; // one per sorted tuple of form_indices(n, degree)
    double time_stamp = 0;            // optional

    FormField() = default;
    FormField(int p, GridBox b);

    int components() const { return (int)coeffs.size(); }
    /// α at an arbitrary (not necessarily sorted) tuple, sign-expanded.
    double value_at(const FormIndex& idx, std::size_t point) const;
    void validate_finite() const;

    FormField& operator+=(const FormField& o);
    FormField& operator-=(const FormField& o);
    FormField& operator*=(double s);
    double max_abs() const;
};

/// Dense totally-covariant tensor field of given rank (all indices 0..n-1).
struct TensorField {
    GridBox box;
    int rank = 0;
    std::vector<GridFunction> comp; // n^rank components, row-major over index tuples

    TensorField() = default;
    TensorField(GridBox b, int r);

    std::size_t flat(const std::vector<int>& idx) const;
    GridFunction& at(const std::vector<int>& idx) { return comp[flat(idx)]; }
    const GridFunction& at(const std::vector<int>& idx) const { return comp[flat(idx)]; }
};

/// Expands sorted-storage form coefficients into the full antisymmetric tensor.
TensorField form_to_tensor(const FormField& u);

} // namespace heatforms
