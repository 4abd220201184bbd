#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "heatforms/estimates.hpp"
#include "heatforms/report_io.hpp"

using namespace heatforms;

namespace {

Scenario flat_scenario(int res = 12) {
    Scenario s = builtin_scenario("flat-torus");
    s.resolution = res;
    s.t_points_small = 6;
    s.t_points_large = 8;
    s.series_order = 1;
    s.quad_nodes = 6;
    return s;
}

Scenario perturbed_scenario(int res = 16) {
    Scenario s = builtin_scenario("perturbed-euclidean");
    s.resolution = res;
    s.t_points_small = 6;
    s.t_points_large = 8;
    s.series_order = 2;
    s.quad_nodes = 8;
    return s;
}

} // namespace

TEST_SUITE("estimates") {

TEST_CASE("l2 contraction: equality at t = 0, eigenvector decay, random data") {
    Scenario s = flat_scenario();
    EstimateContext ctx(s, s.resolution);
    const DirectSolver& solver = ctx.solver(0);
    const DiscreteOperator& op = ctx.discrete(0);
    const GridBox& box = ctx.metric().domain();

    // t = 0 equality
    FormField omega(0, box);
    omega.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) {
        return std::sin(x[0]) + 0.3 * std::cos(2 * x[1]);
    });
    auto rep0 = l2_contraction_check(solver, omega, {0.0});
    CHECK(rep0.norms[0] == doctest::Approx(rep0.omega_norm));

    // eigenvector: ‖u(t)‖ = e^{-λt} ‖ω‖
    int N = box.npts[0];
    double h = box.spacing(0);
    double lam = 4.0 / (h * h) * std::pow(std::sin(M_PI * 1 / N), 2);
    FormField ev(0, box);
    ev.coeffs[0] = GridFunction(box, [](const std::vector<double>& x) { return std::sin(x[0]); });
    auto rep1 = l2_contraction_check(solver, ev, {0.5, 1.0});
    CHECK(rep1.norms[0] == doctest::Approx(std::exp(-lam * 0.5) * rep1.omega_norm).epsilon(1e-10));
    CHECK(rep1.contraction);
    CHECK(rep1.monotone);

    // random ω, p ∈ {0,1}, 20 values of t: machine-precision contraction
    std::mt19937 rng(s.seed);
    std::uniform_real_distribution<double> dist(-1, 1);
    std::vector<double> tgrid;
    for (int i = 0; i < 20; ++i) tgrid.push_back(0.05 + i * 0.35);
    for (int p : {0, 1}) {
        FormField w(p, box);
        for (auto& c : w.coeffs)
            for (auto& v : c.values) v = dist(rng);
        auto rep = l2_contraction_check(ctx.solver(p), w, tgrid);
        CHECK(rep.contraction);
        CHECK(rep.monotone);
        CHECK(rep.worst_excess <= 1e-12 * rep.omega_norm);
    }
}

TEST_CASE("zero data passes vacuously") {
    Scenario s = flat_scenario();
    EstimateContext ctx(s, s.resolution);
    FormField zero(0, ctx.metric().domain());
    auto rep = l2_contraction_check(ctx.solver(0), zero, {0.5, 1.0});
    CHECK(rep.omega_norm == doctest::Approx(0.0));
    CHECK(rep.contraction);
}

TEST_CASE("local estimates on the flat torus: decay slopes and bounded ratios") {
    Scenario s = flat_scenario();
    EstimateContext ctx(s, s.resolution);

    // p=0, k=1, r=2: log-log slope over [1,20] at most -1/2 + 0.05
    EstimateReport rep = local_estimate_check(ctx, 0, 1, 2.0);
    CHECK(rep.pass);
    CHECK(rep.fitted_slope_large <= -0.5 + 0.05);
    CHECK(rep.fitted_c_small > 0);

    // k=0: bounded ratio, no decay asserted
    EstimateReport rep0 = local_estimate_check(ctx, 0, 0, 2.0);
    CHECK(rep0.pass);
    CHECK(rep0.fitted_c_large > 0);

    // p=1: only boundedness asserted; harmonic part keeps k=0 norms flat
    EstimateReport rep1 = local_estimate_check(ctx, 1, 0, 2.0);
    CHECK(rep1.pass);
}

TEST_CASE("local estimates on the perturbed metric across r") {
    Scenario s = perturbed_scenario();
    EstimateContext ctx(s, s.resolution);
    for (double r : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
        EstimateReport rep = local_estimate_check(ctx, 0, 1, r);
        CHECK(rep.pass);
        CHECK(rep.fitted_c_small > 0);
        CHECK(rep.fitted_c_large > 0);
    }
    EstimateReport form = local_estimate_check(ctx, 1, 1, 2.0);
    CHECK(form.pass);
}

TEST_CASE("global and classical estimates reduce and extend correctly") {
    Scenario s = flat_scenario();
    EstimateContext ctx(s, s.resolution);
    // flat torus: R_ε ≡ 1, weights ≡ 1: global reduces to the local aggregate
    EstimateReport glob = global_estimate_check(ctx, 0, 1, 2.0);
    CHECK(glob.pass);
    CHECK(glob.eta == doctest::Approx(1.0));

    EstimateReport cls = classical_estimate_check(ctx, 0, 1, 2.0);
    CHECK(cls.pass);
    CHECK(cls.classical_regime);
    CHECK(cls.eta == doctest::Approx(1.0));
    // η = 1: classical constant equals the fitted constant
    CHECK(cls.classical_constant ==
          doctest::Approx(std::max(cls.fitted_c_small, cls.fitted_c_large)));
    CHECK(cls.ricci_bound == doctest::Approx(0.0).epsilon(1e-10));

    Scenario sp = perturbed_scenario();
    EstimateContext ctxp(sp, sp.resolution);
    EstimateReport pglob = global_estimate_check(ctxp, 0, 1, 2.0);
    CHECK(pglob.pass);
    CHECK(pglob.eta > 0.3);
    EstimateReport pcls = classical_estimate_check(ctxp, 0, 1, 2.0);
    CHECK(pcls.pass);
    CHECK(pcls.classical_regime);
    CHECK(pcls.ricci_bound > 0); // curvature genuinely measured
}

TEST_CASE("report serialization: stable bytes, csv rows, plot data") {
    Scenario s = flat_scenario();
    EstimateContext ctx(s, s.resolution);
    EstimateReport rep = local_estimate_check(ctx, 0, 0, 2.0);

    std::string j1 = report_json(s, {rep});
    std::string j2 = report_json(s, {rep});
    CHECK(j1 == j2);
    CHECK(j1.find("\"schema_version\"") != std::string::npos);
    CHECK(j1.find("\"scenario_hash\"") != std::string::npos);
    CHECK(j1.find("\"seed\"") != std::string::npos);

    std::string csv = report_csv({rep});
    // header + one line per row
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == rep.rows.size() + 1);

    std::vector<double> t{1.0, 2.0, 4.0}, v{0.5, 0.25, 0.125};
    write_plot_data("/tmp/heatforms_plot_test.txt", t, v);
    std::ifstream in("/tmp/heatforms_plot_test.txt");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("log10") != std::string::npos);
    double a, b;
    in >> a >> b;
    CHECK(a == doctest::Approx(0.0));
    CHECK(b == doctest::Approx(std::log10(0.5)));
}

TEST_CASE("scenario hashing and json round trip") {
    Scenario s = builtin_scenario("perturbed-euclidean");
    std::uint64_t h1 = s.hash();
    Scenario s2 = s;
    CHECK(s2.hash() == h1);
    s2.seed = 43;
    CHECK(s2.hash() != h1);

    Scenario parsed = scenario_from_json_text(R"({"name":"flat-torus","resolution":16,"r":"inf"})");
    CHECK(std::isinf(parsed.r));
    CHECK_THROWS_AS(scenario_from_json_text(R"({"name":"nope"})"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"name":"flat-torus","resolution":4})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"name":"flat-torus","epsilon":0.5})"),
                    std::invalid_argument);
}

} // TEST_SUITE
