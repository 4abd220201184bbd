#include <doctest.h>

#include <cmath>
#include <fstream>

#include "heatforms/discrete_operator.hpp"
#include "heatforms/laplacian.hpp"

using namespace heatforms;

namespace {

GridBox torus2(int N) { return GridBox(2, {0, 0}, {2 * M_PI, 2 * M_PI}, {N, N}, true); }

ChartMetric sphere_chart(int N = 40) {
    GridBox box(2, {M_PI / 2 - 0.7, 0.2}, {M_PI / 2 + 0.7, 1.6}, {N, N}, false);
    return ChartMetric::analytic(box, {{"1", "0"}, {"0", "sin(x1)^2"}});
}

bool interior4(const GridBox& box, std::size_t p, int margin = 4) {
    if (box.periodic) return true;
    auto idx = box.unflatten(p);
    for (int a = 0; a < box.n; ++a)
        if (idx[a] < margin || idx[a] >= box.npts[a] - margin) return false;
    return true;
}

} // namespace

TEST_SUITE("laplacian") {

TEST_CASE("flat metric: divergence form is exactly the componentwise stencil sum") {
    GridBox box = torus2(32);
    auto flat = ChartMetric::flat(box);
    GridFunction f(box, [](const std::vector<double>& x) {
        return std::sin(x[0]) * std::cos(2 * x[1]);
    });
    GridFunction lap = laplacian_functions(flat, f);
    GridFunction expect = finite_difference(f, 0, 2) + finite_difference(f, 1, 2);
    for (std::size_t p = 0; p < f.size(); ++p) CHECK(lap[p] == expect[p]); // bit for bit
}

TEST_CASE("f = x1^2 gives the constant 2") {
    GridBox box(2, {-1, -1}, {1, 1}, {21, 21}, false);
    auto flat = ChartMetric::flat(box);
    GridFunction f(box, [](const std::vector<double>& x) { return x[0] * x[0]; });
    GridFunction lap = laplacian_functions(flat, f);
    for (std::size_t p = 0; p < f.size(); ++p) CHECK(lap[p] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("conformal metric in 2d: Laplacian scales by e^{-2u}") {
    GridBox box = torus2(32);
    // g = e^{2u} δ with u = 0.1 sin(x1) cos(x2): g^{ij}√g = δ, so the
    // first-order coefficient vanishes identically and Δ_g f = e^{-2u} Δ f
    // holds with the same stencils on both sides
    std::string e2u = "exp(2*0.1*sin(x1)*cos(x2))";
    auto m = ChartMetric::analytic(box, {{e2u, "0"}, {"0", e2u}});
    GridFunction f(box, [](const std::vector<double>& x) {
        return std::cos(x[0]) + std::sin(2 * x[1]);
    });
    GridFunction lap = laplacian_functions(m, f);
    GridFunction flat_lap = finite_difference(f, 0, 2) + finite_difference(f, 1, 2);
    for (std::size_t p = 0; p < f.size(); ++p) {
        auto x = box.point(p);
        double scale = std::exp(-2 * 0.1 * std::sin(x[0]) * std::cos(x[1]));
        CHECK(lap[p] == doctest::Approx(scale * flat_lap[p]).epsilon(1e-9));
    }
}

TEST_CASE("hodge laplacian on the flat metric: componentwise -Σ∂², sign mapping") {
    GridBox box = torus2(32);
    auto flat = ChartMetric::flat(box);
    FormField u(1, box);
    u.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) {
        return std::sin(x[0]) * std::cos(x[1]);
    });
    FormField lap = hodge_laplacian(flat, u);
    GridFunction expect = finite_difference(u.coeffs[0], 0, 2) + finite_difference(u.coeffs[0], 1, 2);
    for (std::size_t p = 0; p < expect.size(); ++p) {
        CHECK(lap.coeffs[0].values[p] == doctest::Approx(-expect[p]).epsilon(1e-12));
        CHECK(lap.coeffs[1].values[p] == doctest::Approx(0.0));
    }
    // Bochner consistency on flat: form operator == -(componentwise scalar op)
    GridFunction slap = laplacian_functions(flat, u.coeffs[0]);
    for (std::size_t p = 0; p < expect.size(); ++p)
        CHECK(lap.coeffs[0].values[p] == doctest::Approx(-slap[p]).epsilon(1e-12));
}

TEST_CASE("u = dh for harmonic h is hodge-harmonic on the flat torus") {
    GridBox box = torus2(32);
    auto flat = ChartMetric::flat(box);
    // h = sin(x1)sinh-free harmonic on the torus: use h with Δh = 0 mod
    // constants: h = x-independent harmonic candidates are constants only, so
    // take h = sin(x1+x2)·? instead verify d commutes: Δ(dh) = d(Δh) by
    // comparing against the laplacian of h route
    GridFunction h(box, [](const std::vector<double>& x) {
        return std::sin(x[0]) * std::sin(x[1]);
    });
    // Δ_flat h = -2h (eigenfunction); so hodge(dh) should equal -(-2)(dh)... in
    // the nonnegative convention: hodge(dh) = 2·dh
    FormField dh(1, box);
    dh.coeffs[0] = finite_difference(h, 0, 1);
    dh.coeffs[1] = finite_difference(h, 1, 1);
    FormField lap = hodge_laplacian(flat, dh);
    for (std::size_t p = 0; p < h.size(); ++p) {
        CHECK(lap.coeffs[0].values[p] == doctest::Approx(2 * dh.coeffs[0].values[p]).epsilon(1e-4).scale(1.0));
        CHECK(lap.coeffs[1].values[p] == doctest::Approx(2 * dh.coeffs[1].values[p]).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("sphere eigenform: Δ(df) = λ df with the Weitzenböck term active") {
    // f = cosθ is the l = 1 spherical harmonic: Δ_hodge f = 2f, and d
    // commutes: Δ_hodge(df) = 2 df with df = -sinθ dθ.
    auto m = sphere_chart(48);
    const GridBox& box = m.domain();
    FormField u(1, box);
    u.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) { return -std::sin(x[0]); });
    FormField lap = hodge_laplacian(m, u);
    for (std::size_t p = 0; p < box.size(); ++p) {
        if (!interior4(box, p)) continue;
        CHECK(lap.coeffs[0].values[p] ==
              doctest::Approx(2 * u.coeffs[0].values[p]).epsilon(5e-5).scale(1.0));
        CHECK(lap.coeffs[1].values[p] == doctest::Approx(0.0).epsilon(5e-5).scale(1.0));
    }
    // the scalar route: Δ_hodge on functions = -Δ_LB: f = cosθ -> 2cosθ
    GridFunction f(box, [](const std::vector<double>& x) { return std::cos(x[0]); });
    GridFunction lapf = laplacian_functions(m, f);
    for (std::size_t p = 0; p < box.size(); ++p) {
        if (!interior4(box, p)) continue;
        CHECK(-lapf[p] == doctest::Approx(2 * std::cos(box.point(p)[0])).epsilon(5e-6).scale(1.0));
    }
}

TEST_CASE("coefficient route equals the covariant-derivative route") {
    auto m = sphere_chart(40);
    const GridBox& box = m.domain();
    FormField u(1, box);
    u.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) {
        return std::sin(x[0]) * std::cos(x[1]);
    });
    u.coeffs[1] = GridFunction(box, [](const std::vector<double>& x) {
        return std::cos(2 * x[1]);
    });
    FormField a = hodge_laplacian(m, u);
    FormField b = hodge_laplacian_bochner(m, u);
    for (int K = 0; K < 2; ++K)
        for (std::size_t p = 0; p < box.size(); ++p) {
            if (!interior4(box, p, 5)) continue;
            CHECK(a.coeffs[K].values[p] ==
                  doctest::Approx(b.coeffs[K].values[p]).epsilon(2e-4).scale(1.0));
        }
}

TEST_CASE("perturbation operator: flat collapse and series-expansion coefficients") {
    GridBox box = torus2(24);
    auto flat = ChartMetric::flat(box);
    PerturbationOperator Yflat(flat, 0);
    FormField f(0, box);
    f.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) { return std::sin(x[0]); });
    FormField y = Yflat.apply(f);
    CHECK(y.max_abs() == doctest::Approx(0.0));
    CHECK(Yflat.a_sum_field().max_abs() == doctest::Approx(0.0));
    CHECK(Yflat.lower_order_sum_field().max_abs() == doctest::Approx(0.0));

    // g = (1+η x1)δ: a_ij(0) = 0 and a_ij ≈ -η x1 δ^{ij} near 0
    double eta = 0.01;
    GridBox bbox(2, {-0.5, -0.5}, {0.5, 0.5}, {21, 21}, false);
    auto m = ChartMetric::analytic(
        bbox, {{"1+0.01*x1", "0"}, {"0", "1+0.01*x1"}});
    PerturbationOperator Y(m, 0);
    std::size_t center = bbox.flat_index({10, 10});
    CHECK(bbox.point(center)[0] == doctest::Approx(0.0));
    CHECK(Y.a_sum_at(center) == doctest::Approx(0.0).epsilon(1e-12));
    std::size_t off = bbox.flat_index({14, 10});
    double x1 = bbox.point(off)[0];
    // Σ_ij |a_ij| = 2|1/(1+ηx1) - 1| ≈ 2η|x1|
    CHECK(Y.a_sum_at(off) == doctest::Approx(2 * eta * std::abs(x1)).epsilon(0.01));
}

TEST_CASE("pointwise gC16 bound on a smooth corpus") {
    GridBox box = torus2(24);
    // anisotropic on purpose: a 2-d conformal factor would make the
    // first-order coefficients vanish identically (conformal invariance)
    std::string d = "1+0.03*sin(x1)*sin(x2)";
    auto m = ChartMetric::analytic(box, {{d, "0"}, {"0", "1"}});
    FormField f(0, box);
    f.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) {
        return std::sin(x[0]) + std::cos(2 * x[1]);
    });
    AdmissibleBall ball{{M_PI, M_PI}, 0.8, 1, 0.06};
    auto res = perturbation_apply(m, ball, f);
    CHECK(res.coeffs.alpha == 1);
    CHECK(res.coeffs.a_bound_ok); // Σ|a| = 2·0.03 < ε = 0.06 at worst
    CHECK(res.coeffs.needed_c < 10.0);
    CHECK(res.coeffs.needed_c > 0.0);

    // |Yf| <= ε|∂²f| + Cε R^{-α}|∂f| pointwise with the measured C
    GridFunction d1a = finite_difference(f.coeffs[0], 0, 1);
    GridFunction d1b = finite_difference(f.coeffs[0], 1, 1);
    GridFunction d2a = finite_difference(f.coeffs[0], 0, 2);
    GridFunction d2b = finite_difference(f.coeffs[0], 1, 2);
    GridFunction d2ab = finite_difference(d1a, 1, 1);
    auto pts = points_in_ball(box, ball.center, ball.radius);
    double C = res.coeffs.needed_c;
    for (std::size_t p : pts) {
        double hess = std::sqrt(d2a[p] * d2a[p] + d2b[p] * d2b[p] + 2 * d2ab[p] * d2ab[p]);
        double grad = std::sqrt(d1a[p] * d1a[p] + d1b[p] * d1b[p]);
        double bound = ball.epsilon * hess + C * ball.epsilon / ball.radius * grad + 1e-12;
        CHECK(std::abs(res.Yu.coeffs[0].values[p]) <= bound * 1.75);
    }

    // admissibility order below alpha is rejected
    FormField w(1, box);
    AdmissibleBall ball1{{M_PI, M_PI}, 0.8, 1, 0.06};
    CHECK_THROWS_AS(perturbation_apply(m, ball1, w), std::invalid_argument);
}

TEST_CASE("discrete operator: flat torus spectrum and symmetry") {
    GridBox box = torus2(16);
    auto flat = ChartMetric::flat(box);
    DiscreteOperator op = assemble_discrete(flat, 0, Boundary::Periodic);
    CHECK(op.symmetry_defect == doctest::Approx(0.0));

    // exact symmetry of the quadratic form
    Eigen::MatrixXd A(op.quadratic);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));

    // eigenvalues 4 h^{-2} (sin²(πk/N) + sin²(πl/N)) — checked via apply on
    // Fourier modes
    int N = 16;
    double h = box.spacing(0);
    for (int k : {0, 1, 3}) {
        for (int l : {0, 2}) {
            GridFunction mode(box, [&](const std::vector<double>& x) {
                return std::cos(k * x[0]) * std::cos(l * x[1]);
            });
            FormField f(0, box);
            f.coeffs[0] = mode;
            FormField lap = op.apply(f);
            double lam = 4.0 / (h * h) *
                         (std::pow(std::sin(M_PI * k / N), 2) + std::pow(std::sin(M_PI * l / N), 2));
            for (std::size_t p = 0; p < mode.size(); ++p)
                CHECK(lap.coeffs[0].values[p] ==
                      doctest::Approx(lam * mode[p]).epsilon(1e-9).scale(std::max(1.0, lam)));
        }
    }

    // constant field maps to zero
    FormField c(0, box);
    c.coeffs[0] = GridFunction(box, 1.0);
    CHECK(op.apply(c).max_abs() == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("discrete operator consistency is second order") {
    auto err_at = [&](int N) {
        GridBox box = torus2(N);
        std::string d = "1+0.05*sin(x1)*sin(x2)";
        auto m = ChartMetric::analytic(box, {{d, "0"}, {"0", d}});
        DiscreteOperator op = assemble_discrete(m, 0, Boundary::Periodic);
        FormField f(0, box);
        f.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) {
            return std::sin(x[0]) * std::cos(x[1]);
        });
        FormField lap = op.apply(f);
        GridFunction exact = laplacian_functions(m, f.coeffs[0]);
        double worst = 0;
        for (std::size_t p = 0; p < exact.size(); ++p)
            worst = std::max(worst, std::abs(lap.coeffs[0].values[p] + exact[p]));
        return worst; // note sign: discrete op is the nonnegative convention
    };
    double e16 = err_at(16), e32 = err_at(32);
    CHECK(e32 < e16 * 0.35); // O(h²) would give 0.25; allow slack
}

TEST_CASE("discrete operator on 1-forms: flat equals componentwise scalar operator") {
    GridBox box = torus2(12);
    auto flat = ChartMetric::flat(box);
    DiscreteOperator op1 = assemble_discrete(flat, 1, Boundary::Periodic);
    DiscreteOperator op0 = assemble_discrete(flat, 0, Boundary::Periodic);
    FormField u(1, box);
    u.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) { return std::sin(x[0]); });
    u.coeffs[1] = GridFunction(box, [](const std::vector<double>& x) { return std::cos(x[1]); });
    FormField lap = op1.apply(u);
    for (int K = 0; K < 2; ++K) {
        FormField s(0, box);
        s.coeffs[0] = u.coeffs[K];
        FormField slap = op0.apply(s);
        for (std::size_t p = 0; p < box.size(); ++p)
            CHECK(lap.coeffs[K].values[p] ==
                  doctest::Approx(slap.coeffs[0].values[p]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(assemble_discrete(flat, 3, Boundary::Periodic), std::invalid_argument);
}

TEST_CASE("triplet serialization round trip") {
    GridBox box = torus2(8);
    auto flat = ChartMetric::flat(box);
    DiscreteOperator op = assemble_discrete(flat, 0, Boundary::Periodic);
    std::string path = "/tmp/heatforms_triplets_test.txt";
    op.save_triplets(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.find("triplets") != std::string::npos);
    long rows, cols, nnz;
    in >> rows >> cols >> nnz;
    CHECK(rows == (long)op.dofs());
    CHECK(nnz == (long)op.quadratic.nonZeros());
}

} // TEST_SUITE
