#include <doctest.h>

#include <cmath>

#include "heatforms/connection.hpp"

using namespace heatforms;

namespace {

// chart of the unit sphere away from the poles: g = diag(1, sin² θ)
ChartMetric sphere_chart(int N = 24) {
    GridBox box(2, {M_PI / 2 - 0.7, 0.2}, {M_PI / 2 + 0.7, 1.6}, {N, N}, false);
    return ChartMetric::analytic(box, {{"1", "0"}, {"0", "sin(x1)^2"}});
}

} // namespace

TEST_SUITE("connection") {

TEST_CASE("flat metric: all Christoffel symbols vanish") {
    GridBox box(2, {0, 0}, {2 * M_PI, 2 * M_PI}, {8, 8}, true);
    auto flat = ChartMetric::flat(box);
    auto cd = christoffel(flat, {1.0, 2.0}, 1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                CHECK(cd.gamma(i, j, k) == 0.0);
                CHECK(cd.dgamma({1, 0}, i, j, k) == 0.0);
            }
}

TEST_CASE("sphere chart Christoffels match the symbolic oracle") {
    auto m = sphere_chart();
    double theta = 1.1, phi = 0.8;
    auto cd = christoffel(m, {theta, phi}, 1);
    // Γ^θ_{φφ} = -sinθ cosθ, Γ^φ_{θφ} = Γ^φ_{φθ} = cotθ
    CHECK(cd.gamma(0, 1, 1) == doctest::Approx(-std::sin(theta) * std::cos(theta)).epsilon(1e-12));
    CHECK(cd.gamma(1, 0, 1) == doctest::Approx(std::cos(theta) / std::sin(theta)).epsilon(1e-12));
    CHECK(cd.gamma(1, 1, 0) == doctest::Approx(cd.gamma(1, 0, 1)).epsilon(1e-14)); // symmetry
    CHECK(cd.gamma(0, 0, 0) == doctest::Approx(0.0));
    // derivative: ∂_θ Γ^θ_{φφ} = -cos(2θ)
    CHECK(cd.dgamma({1, 0}, 0, 1, 1) == doctest::Approx(-std::cos(2 * theta)).epsilon(1e-12));
}

TEST_CASE("covariant derivative on the flat metric is the plain partial") {
    GridBox box(2, {0, 0}, {2 * M_PI, 2 * M_PI}, {32, 32}, true);
    auto flat = ChartMetric::flat(box);
    FormField u(1, box);
    u.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) { return std::sin(x[0]); });
    u.coeffs[1] = GridFunction(box, [](const std::vector<double>& x) { return std::cos(x[1]); });
    TensorField cov = covariant_derivative(flat, u, 1);
    TensorField plain = euclidean_derivative_tensor(u, 1);
    for (std::size_t c = 0; c < cov.comp.size(); ++c)
        for (std::size_t p = 0; p < cov.comp[c].size(); ++p)
            CHECK(cov.comp[c].values[p] == plain.comp[c].values[p]); // bit for bit

    // p = 0: |∇u| equals the Euclidean gradient magnitude on g = δ
    FormField f(0, box);
    f.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) {
        return std::sin(x[0]) * std::cos(x[1]);
    });
    GridFunction mod = tensor_modulus(&flat, covariant_derivative(flat, f, 1), 0);
    GridFunction emod = tensor_modulus(nullptr, euclidean_derivative_tensor(f, 1), 0);
    for (std::size_t p = 0; p < mod.size(); ++p)
        CHECK(mod.values[p] == doctest::Approx(emod.values[p]).epsilon(1e-14));
}

TEST_CASE("covariant derivative of dφ on the sphere matches the symbolic oracle") {
    auto m = sphere_chart(20);
    const GridBox& box = m.domain();
    FormField u(1, box); // u = dφ: α_θ = 0, α_φ = 1
    u.coeffs[1] = GridFunction(box, 1.0);
    TensorField cov = covariant_derivative(m, u, 1);
    // (∇u)_{a j} = -Γ^φ_{j a}; nonzero entries: (θ,φ) and (φ,θ) -> -cotθ,
    // (φ,φ)? Γ^φ_{φφ}=0; also (a=φ, j=θ): -Γ^φ_{θφ} = -cotθ
    for (std::size_t p = 0; p < box.size(); ++p) {
        double theta = box.point(p)[0];
        double cot = std::cos(theta) / std::sin(theta);
        CHECK(cov.at({0, 0}).values[p] == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(cov.at({0, 1}).values[p] == doctest::Approx(-cot).epsilon(1e-10));
        CHECK(cov.at({1, 0}).values[p] == doctest::Approx(-cot).epsilon(1e-10));
        // (∇u)_{φ,φ} = -Γ^k_{φφ} α_k = -Γ^θ_{φφ}·0 - Γ^φ_{φφ}·1 = 0
        CHECK(cov.at({1, 1}).values[p] == doctest::Approx(0.0).epsilon(1e-10));
    }
}

TEST_CASE("antisymmetric storage expands with correct signs") {
    GridBox box(3, {0, 0, 0}, {1, 1, 1}, {4, 4, 4}, false);
    FormField w(2, box);
    // components on sorted tuples (0,1), (0,2), (1,2)
    w.coeffs[0] = GridFunction(box, 1.0);
    w.coeffs[2] = GridFunction(box, 2.0);
    CHECK(w.value_at({0, 1}, 0) == doctest::Approx(1.0));
    CHECK(w.value_at({1, 0}, 0) == doctest::Approx(-1.0));
    CHECK(w.value_at({2, 1}, 0) == doctest::Approx(-2.0));
    CHECK(w.value_at({1, 1}, 0) == doctest::Approx(0.0));
    TensorField T = form_to_tensor(w);
    CHECK(T.at({1, 0}).values[0] == doctest::Approx(-1.0));
}

TEST_CASE("ricci: flat zero, sphere Einstein, conformal FD oracle") {
    GridBox box(2, {0, 0}, {2 * M_PI, 2 * M_PI}, {8, 8}, true);
    auto flat = ChartMetric::flat(box);
    auto rc_flat = ricci_tensor(flat, {1.0, 1.0});
    CHECK(rc_flat.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    auto m = sphere_chart();
    std::vector<double> y{1.2, 0.9};
    auto rc = ricci_tensor(m, y);
    CHECK(rc(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rc(1, 1) == doctest::Approx(std::sin(1.2) * std::sin(1.2)).epsilon(1e-10));
    CHECK(rc(0, 1) == doctest::Approx(0.0).epsilon(1e-10));

    // conformal metric: analytic Ricci against a gridded finite-difference twin
    GridBox cbox(2, {0, 0}, {2 * M_PI, 2 * M_PI}, {48, 48}, true);
    std::string cf = "1+0.08*sin(x1)*cos(x2)";
    auto conf = ChartMetric::analytic(cbox, {{cf, "0"}, {"0", cf}});
    std::vector<std::vector<GridFunction>> comp(2, std::vector<GridFunction>(2, GridFunction(cbox)));
    for (std::size_t p = 0; p < cbox.size(); ++p) {
        auto x = cbox.point(p);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) comp[i][j].values[p] = conf.component(i, j, x);
    }
    auto gridded = ChartMetric::gridded(cbox, comp, 3);
    std::vector<double> probe = cbox.point(5 * 48 + 11);
    auto rc_exact = ricci_tensor(conf, probe);
    auto rc_fd = ricci_tensor(gridded, probe);
    CHECK((rc_exact - rc_fd).cwiseAbs().maxCoeff() < 5e-4); // O(h²) stencil error

    // weak-bounded-geometry style field: |∇^0 Rc| finite and positive
    GridFunction mod = ricci_derivative_modulus(conf, 0);
    CHECK(mod.max_abs() > 0);
    CHECK(std::isfinite(mod.max_abs()));
}

TEST_CASE("sobolev comparison: flat metric collapses to equality") {
    GridBox box(2, {-2, -2}, {2, 2}, {41, 41}, false);
    auto flat = ChartMetric::flat(box);
    FormField f(0, box);
    f.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]));
    });
    AdmissibleBall ball{{0.0, 0.0}, 1.0, 1, 0.1};
    auto rep = sobolev_compare(flat, f, ball, 1, 2.0, 1.0, 1.0);
    // ε-dilate of the Euclidean ball only adds points: rhs >= lhs, C-term idle
    CHECK(rep.needed_forward_c == doctest::Approx(0.0));
    CHECK(rep.forward_margin >= 0);
    CHECK(rep.lhs <= rep.rhs_leading + 1e-12);
    CHECK(rep.reverse_lhs <= rep.reverse_rhs + 1e-12); // R = 1, shrunken ball
}

TEST_CASE("sobolev comparison rejects insufficient admissibility order") {
    GridBox box(2, {-2, -2}, {2, 2}, {21, 21}, false);
    auto flat = ChartMetric::flat(box);
    FormField f(1, box);
    AdmissibleBall ball{{0.0, 0.0}, 1.0, 1, 0.1}; // order 1 < required 2 for p>=1
    CHECK_THROWS_WITH_AS(sobolev_compare(flat, f, ball, 1, 2.0, 1.0, 1.0),
                         doctest::Contains("beta = 2"), std::invalid_argument);
}

TEST_CASE("sobolev pointwise bound on a perturbed metric, p=1, k=1") {
    GridBox box(2, {0, 0}, {2 * M_PI, 2 * M_PI}, {24, 24}, true);
    std::string d = "1+0.04*sin(x1)*sin(x2)";
    auto m = ChartMetric::analytic(box, {{d, "0"}, {"0", d}});
    FormField u(1, box);
    u.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) { return std::cos(x[1]); });
    u.coeffs[1] = GridFunction(box, [](const std::vector<double>& x) { return std::sin(x[0]); });
    AdmissibleBall ball{{M_PI, M_PI}, 0.6, 2, 0.08};
    auto rep = sobolev_compare(m, u, ball, 1, 2.0, 2.0, 2.0);
    CHECK(rep.pointwise_needed_c < 50.0);  // C stays corpus-scale, not unbounded
    CHECK(std::isfinite(rep.needed_forward_c));
}

} // TEST_SUITE
