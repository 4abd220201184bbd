#include <doctest.h>

#include <cmath>
#include <random>

#include "heatforms/covering.hpp"

using namespace heatforms;

namespace {

GridBox torus2(int N) { return GridBox(2, {0, 0}, {2 * M_PI, 2 * M_PI}, {N, N}, true); }

ChartMetric perturbed(const GridBox& box, double amp) {
    std::string d = "1+" + std::to_string(amp) + "*sin(x1)*sin(x2)";
    return ChartMetric::analytic(box, {{d, "0"}, {"0", d}});
}

} // namespace

TEST_SUITE("covering") {

TEST_CASE("vitali: single ball covers itself; empty input gives empty covering") {
    std::vector<Ball> one{{{0.0, 0.0}, 0.3, -1}};
    auto sel = vitali_select(one, 1.0);
    CHECK(sel.selected.size() == 1);
    CHECK(sel.covered_by[0] == 0);
    CHECK(sel.disjoint_verified);
    CHECK(sel.cover_verified);

    std::vector<Ball> none;
    auto empty = vitali_select(none, 1.0);
    CHECK(empty.selected.empty());
    CHECK(empty.disjoint_verified);
    CHECK(empty.cover_verified);
}

TEST_CASE("vitali: two overlapping unit balls select exactly one") {
    std::vector<Ball> two{{{0.0, 0.0}, 1.0, -1}, {{1.0, 0.0}, 1.0, -1}};
    auto sel = vitali_select(two, 1.0);
    CHECK(sel.selected.size() == 1);
    CHECK(sel.disjoint_verified);
    CHECK(sel.cover_verified); // the other ball sits inside the 5x dilate
    CHECK(sel.worst_cover_excess <= 0);
}

TEST_CASE("vitali: 200 seeded random balls pass the exhaustive checks") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> pos(0.0, 1.0), rad(0.01, 0.1);
    std::vector<Ball> balls;
    for (int i = 0; i < 200; ++i) balls.push_back({{pos(rng), pos(rng)}, rad(rng), -1});
    auto sel = vitali_select(balls, 0.1);
    CHECK(sel.disjoint_verified);
    CHECK(sel.cover_verified);
    CHECK(sel.selected.size() > 5);
    CHECK(sel.selected.size() < 200);

    // radii out of range are rejected
    std::vector<Ball> bad{{{0.0, 0.0}, 0.5, -1}};
    CHECK_THROWS_AS(vitali_select(bad, 0.1), std::invalid_argument);
}

TEST_CASE("admissible covering on the flat torus: uniform radii, spec constants") {
    GridBox box = torus2(16);
    auto flat = ChartMetric::flat(box);
    auto field = compute_radius_field(flat, 1, 0.1);
    GridGeodesics geo(flat);
    Covering cov = build_admissible_covering(flat, field, geo);
    CHECK(cov.disjoint_verified);
    CHECK(cov.cover_verified);
    // R_ε ≡ 1 -> balls of radius 1/120, dilates of radius 1/24
    for (const auto& b : cov.selected) CHECK(b.radius == doctest::Approx(1.0 / 120));
    for (const auto& d : cov.dilated) CHECK(d.radius == doctest::Approx(5.0 / 120));
    // T = ((1+ε)/(1-ε))^{n/2} 120^n at ε = 0.1, n = 2: (11/9)·14400
    CHECK(cov.overlap_bound_T == doctest::Approx(11.0 / 9.0 * 14400));
    CHECK(cov.max_overlap <= cov.overlap_bound_T);
    CHECK(cov.max_overlap >= 1); // every center carries its own ball
    CHECK(cov.max_patch_overlap <= cov.overlap_bound_T);
}

TEST_CASE("resolvable divisor: dilates genuinely overlap and stay under T") {
    GridBox box = torus2(16);
    auto m = perturbed(box, 0.05);
    auto field = compute_radius_field(m, 1, 0.08);
    GridGeodesics geo(m);
    Covering cov = build_admissible_covering(m, field, geo, 8.0, 5.0);
    CHECK(cov.disjoint_verified);
    CHECK(cov.cover_verified);
    CHECK(cov.max_overlap > 1); // real overlap at this scale
    CHECK(cov.max_overlap <= overlap_bound(2, 0.08, 8.0));

    // Σ_j ∫_{B_j} |f| <= T ‖f‖_{L¹} on a positive test function
    GridFunction f(box, [](const std::vector<double>& x) {
        return 1.5 + std::sin(x[0]) * std::cos(x[1]);
    });
    GridFunction sdet(box);
    for (std::size_t p = 0; p < box.size(); ++p) sdet.values[p] = m.sqrt_det(box.point(p));
    double total = 0;
    for (std::size_t p = 0; p < box.size(); ++p)
        total += f[p] * sdet[p] * box.cell_volume();
    double patch_total = 0;
    for (const auto& d : cov.dilated) {
        const auto& dists = geo.distances_from((std::size_t)d.center_point);
        for (std::size_t p = 0; p < box.size(); ++p)
            if (dists[p] <= d.radius) patch_total += f[p] * sdet[p] * box.cell_volume();
    }
    CHECK(patch_total <= cov.overlap_bound_T * total);

    // covering export carries the plotting fields
    std::string js = cov.to_json();
    CHECK(js.find("overlap_bound_T") != std::string::npos);
    CHECK(js.find("balls") != std::string::npos);
}

TEST_CASE("weighted norms: plain reduction and trivial values") {
    GridBox box = torus2(16);
    GridFunction one(box, 1.0);
    // f ≡ 1 on the flat unit-ish torus: ∫ 1 dv = (2π)², so normalize by area
    double l2 = weighted_norm(one, 2.0, nullptr, nullptr);
    CHECK(l2 == doctest::Approx(2 * M_PI)); // (∫1)^{1/2} over [0,2π)²
    CHECK(weighted_norm(one, INFINITY, nullptr, nullptr) == doctest::Approx(1.0));

    GridFunction w(box, 2.0);
    double weighted = weighted_norm(one, 2.0, &w, nullptr);
    CHECK(weighted == doctest::Approx(std::sqrt(2.0) * 2 * M_PI));

    GridFunction badf(box, 1.0);
    badf.values[3] = NAN;
    CHECK_THROWS_AS(weighted_norm(badf, 2.0, nullptr, nullptr), std::domain_error);
}

TEST_CASE("patch-sum equivalence with the explicit constants") {
    GridBox box = torus2(16);
    auto m = perturbed(box, 0.05);
    auto field = compute_radius_field(m, 1, 0.08);
    GridGeodesics geo(m);
    Covering cov = build_admissible_covering(m, field, geo, 8.0, 5.0);
    GridFunction sdet(box);
    for (std::size_t p = 0; p < box.size(); ++p) sdet.values[p] = m.sqrt_det(box.point(p));
    GridFunction f(box, [](const std::vector<double>& x) {
        return std::exp(std::sin(x[0])) + 0.3 * std::cos(2 * x[1]);
    });
    for (double gamma : {0.0, 2.0, 6.0}) {
        auto eq = patch_norm_equivalence(cov, field, geo, f, gamma, 2.0, sdet);
        CHECK(eq.lower_ok);
        CHECK(eq.upper_ok);
        CHECK(eq.lower_constant == doctest::Approx(std::pow(2.0, gamma)));
        CHECK(eq.upper_constant == doctest::Approx(std::pow(2.0, gamma) * cov.overlap_bound_T));
    }
}

TEST_CASE("globalize: single-ball reduction and mismatch rejection") {
    // single-ball manifold: global bound = local × R^{γ/r}
    std::vector<LocalContribution> one{{0.7, 0.5, 1, 2.0, 1}};
    double gamma = 1 * 2.0 + 2.0 * 1; // kr + rα
    auto g = globalize(one, gamma, 1.0, 1.0);
    CHECK(g.weighted_lhs == doctest::Approx(0.7 * std::pow(0.5, gamma / 2.0)));
    CHECK(g.needed_c == doctest::Approx(g.weighted_lhs));

    // flat torus: R ≡ 1 makes the weight vanish from both sides
    std::vector<LocalContribution> flat{{0.3, 1.0, 1, 2.0, 1}, {0.4, 1.0, 1, 2.0, 1}};
    auto gf = globalize(flat, gamma, 2.0, 1.5);
    CHECK(gf.weighted_lhs == doctest::Approx(std::sqrt(0.09 + 0.16)));
    CHECK(gf.needed_c == doctest::Approx(gf.weighted_lhs / 3.0));

    std::vector<LocalContribution> bad{{0.3, 1.0, 1, 2.0, 1}, {0.4, 1.0, 2, 2.0, 1}};
    CHECK_THROWS_AS(globalize(bad, gamma, 1.0, 1.0), std::invalid_argument);
}

} // TEST_SUITE
