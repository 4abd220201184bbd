// Scenario-driven front end: loads metric scenarios, runs the verification
// checks and emits JSON/CSV/plot-data artifacts.
//
// Exit codes: 0 all asserted inequalities pass; 1 assertion failure;
// 2 usage or malformed scenario; 3 numerical refusal (series divergence).

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatforms/estimates.hpp"
#include "heatforms/heat_kernel.hpp"
#include "heatforms/report_io.hpp"

using namespace heatforms;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRefusal = 3;

struct CommonOpts {
    std::string scenario_file;
    std::string builtin = "flat-torus";
    std::string output_dir;
    int jobs = 1;
    // overrides; negative/empty = keep scenario value
    int resolution = -1;
    int p = -1, k = -1;
    std::string r;
    double epsilon = -1, delta = -1, amplitude = -1;
    int series_order = -1, quad_nodes = -1;
    long seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--scenario", o.scenario_file, "scenario JSON file");
    cmd->add_option("--builtin", o.builtin,
                    "builtin scenario: flat-torus | sphere-chart | perturbed-euclidean");
    cmd->add_option("--output", o.output_dir, "output directory (default: scenario output_dir)");
    cmd->add_option("--jobs", o.jobs, "worker cap for parallel sweep jobs")->check(CLI::Range(1, 64));
    cmd->add_option("--resolution", o.resolution, "grid resolution override");
    cmd->add_option("--p", o.p, "form degree override");
    cmd->add_option("--k", o.k, "derivative order override");
    cmd->add_option("--r", o.r, "Lebesgue exponent override (number or 'inf')");
    cmd->add_option("--epsilon", o.epsilon, "admissibility epsilon override");
    cmd->add_option("--delta", o.delta, "series delta override");
    cmd->add_option("--amplitude", o.amplitude, "perturbation amplitude override");
    cmd->add_option("--series-order", o.series_order, "Duhamel truncation order J");
    cmd->add_option("--quad-nodes", o.quad_nodes, "time-quadrature nodes");
    cmd->add_option("--seed", o.seed, "corpus seed (recorded in outputs)");
}

Scenario resolve_scenario(const CommonOpts& o) {
    Scenario s = o.scenario_file.empty() ? builtin_scenario(o.builtin)
                                         : load_scenario(o.scenario_file);
    if (o.resolution > 0) s.resolution = o.resolution;
    if (o.p >= 0) s.p = o.p;
    if (o.k >= 0) s.k = o.k;
    if (!o.r.empty())
        s.r = o.r == "inf" ? std::numeric_limits<double>::infinity() : std::stod(o.r);
    if (o.epsilon > 0) s.epsilon = o.epsilon;
    if (o.delta > 0) s.delta = o.delta;
    if (o.amplitude >= 0) s.amplitude = o.amplitude;
    if (o.series_order >= 0) s.series_order = o.series_order;
    if (o.quad_nodes > 0) s.quad_nodes = o.quad_nodes;
    if (o.seed >= 0) s.seed = (unsigned)o.seed;
    if (!o.output_dir.empty()) s.output_dir = o.output_dir;
    s.validate();
    std::filesystem::create_directories(s.output_dir);
    return s;
}

nlohmann::json header_json(const Scenario& s) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["scenario"] = nlohmann::json::parse(s.canonical_json());
    j["scenario_hash"] = s.hash();
    j["seed"] = s.seed;
    return j;
}

std::string out_path(const Scenario& s, const std::string& file) {
    return (std::filesystem::path(s.output_dir) / file).string();
}

int finish(const Scenario& s, nlohmann::json& j, const std::string& name, bool pass,
           const std::vector<std::string>& failures) {
    j["pass"] = pass;
    j["failures"] = failures;
    write_text_file(out_path(s, name + ".json"), j.dump(2) + "\n");
    for (const auto& f : failures) std::cerr << "FAIL: " << f << "\n";
    std::cout << (pass ? "PASS " : "FAIL ") << name << "\n";
    return pass ? kExitPass : kExitFail;
}

// --- kernel-check ---------------------------------------------------------

int run_kernel_check(int n, const std::string& gamma_str, const std::string& r_str,
                     const Scenario& s) {
    MultiIndex gamma(n, 0);
    {
        std::stringstream ss(gamma_str);
        std::string tok;
        int axis = 0;
        while (std::getline(ss, tok, ',') && axis < n) gamma[axis++] = std::stoi(tok);
    }
    double r = r_str == "inf" ? std::numeric_limits<double>::infinity() : std::stod(r_str);

    std::vector<double> tgrid, values;
    for (int i = 0; i < 12; ++i) tgrid.push_back(0.05 * std::pow(20.0 / 0.05, i / 11.0));
    for (double t : tgrid) values.push_back(kernel_lr_norm(n, gamma, r, t));
    ExponentFit fit = exponent_fit(tgrid, values);
    double expected = -(order_of(gamma) / 2.0 + 0.5 * n * (1 - (std::isinf(r) ? 0 : 1 / r)));

    std::vector<std::string> failures;
    if (std::abs(fit.slope - expected) > 1e-6) {
        std::ostringstream m;
        m << "kernel norm slope " << fit.slope << " differs from " << expected << " beyond 1e-6";
        failures.push_back(m.str());
    }
    for (double t : {0.1, 1.0, 10.0}) {
        double mass = kernel_lr_norm(n, MultiIndex(n, 0), 1.0, t);
        if (std::abs(mass - 1.0) > 1e-9)
            failures.push_back("kernel mass deviates from 1 beyond 1e-9");
    }

    nlohmann::json j = header_json(s);
    j["check"] = "kernel";
    j["n"] = n;
    j["gamma"] = gamma;
    j["r"] = std::isinf(r) ? nlohmann::json("inf") : nlohmann::json(r);
    j["slope"] = fit.slope;
    j["expected_slope"] = expected;
    j["residual"] = fit.residual;
    write_plot_data(out_path(s, "kernel_norms.dat"), tgrid, values);
    return finish(s, j, "kernel_check", failures.empty(), failures);
}

// --- radius ---------------------------------------------------------------

int run_radius(const Scenario& s, int m) {
    ChartMetric metric = s.build_metric();
    RadiusField field = compute_radius_field(metric, m, s.epsilon);
    GridGeodesics geo(metric);
    RadiusFieldChecks checks = check_radius_field(field, geo);

    std::vector<std::string> failures;
    if (!checks.lipschitz_pass) failures.push_back("radius field violates the 1-Lipschitz bound");
    if (!checks.slow_variation_pass)
        failures.push_back("radius field violates factor-2 slow variation");

    nlohmann::json j = header_json(s);
    j["check"] = "radius";
    j["m"] = m;
    j["min_r_eps"] = field.min_r_eps();
    j["degenerate_points"] = field.degenerate_count();
    j["lipschitz_excess"] = checks.lipschitz_excess;
    j["slow_variation_low_excess"] = checks.slow_variation_low_excess;
    j["slow_variation_high_excess"] = checks.slow_variation_high_excess;
    j["slack"] = checks.slack;

    std::ostringstream csv;
    csv.precision(17);
    for (int a = 0; a < field.box.n; ++a) csv << "x" << a + 1 << ",";
    csv << "r_prime,r_eps,degenerate\n";
    for (std::size_t p = 0; p < field.box.size(); ++p) {
        auto x = field.box.point(p);
        for (double xa : x) csv << xa << ",";
        csv << field.r_prime[p] << "," << field.r_eps[p] << "," << (field.degenerate[p] ? 1 : 0)
            << "\n";
    }
    write_text_file(out_path(s, "radius_field.csv"), csv.str());
    return finish(s, j, "radius", failures.empty(), failures);
}

// --- cover ----------------------------------------------------------------

int run_cover(const Scenario& s, int m, double divisor, double dilation) {
    ChartMetric metric = s.build_metric();
    RadiusField field = compute_radius_field(metric, m, s.epsilon);
    GridGeodesics geo(metric);
    Covering cov = build_admissible_covering(metric, field, geo, divisor, dilation);

    std::vector<std::string> failures;
    if (!cov.disjoint_verified) failures.push_back("selected family is not disjoint");
    if (!cov.cover_verified) failures.push_back("5-cover property failed");
    if (cov.max_overlap > cov.overlap_bound_T)
        failures.push_back("measured overlap exceeds the bound T");
    if (cov.max_patch_overlap > cov.overlap_bound_T)
        failures.push_back("patch overlap exceeds the bound T");

    nlohmann::json j = header_json(s);
    j["check"] = "cover";
    j["covering"] = nlohmann::json::parse(cov.to_json());
    write_text_file(out_path(s, "covering.json"), cov.to_json() + "\n");
    return finish(s, j, "cover", failures.empty(), failures);
}

// --- duhamel-compare ------------------------------------------------------

int run_duhamel_compare(const Scenario& s) {
    EstimateContext ctx(s, s.resolution);
    const GridBox& box = ctx.metric().domain();
    double h = 0;
    for (int a = 0; a < box.n; ++a) h = std::max(h, box.spacing(a));

    std::vector<std::string> failures;
    nlohmann::json rows = nlohmann::json::array();
    double fitted_ratio_c = 0;
    for (double t : {0.5, 1.0, 2.0}) {
        int alpha = s.p == 0 ? 1 : 2;
        AdmissibleBall ball = ctx.center_ball(std::max(alpha, 2));
        SeriesConfig cfg;
        cfg.truncation_order = 3;
        cfg.quad_nodes = std::max(s.quad_nodes, 12);
        cfg.delta = s.delta;
        cfg.epsilon = s.epsilon;
        const auto& corpus = ctx.corpus(s.p);
        DuhamelResult res = duhamel_solve(ctx.perturbation(s.p), ball, corpus[0], t, cfg);
        FormField ref = ctx.solver(s.p).solve(corpus[0], t);
        double num = 0, den = 0;
        for (std::size_t c = 0; c < ref.coeffs.size(); ++c)
            for (std::size_t q = 0; q < ref.coeffs[c].size(); ++q) {
                double d = res.u.coeffs[c].values[q] - ref.coeffs[c].values[q];
                num += d * d;
                den += ref.coeffs[c].values[q] * ref.coeffs[c].values[q];
            }
        double rel = std::sqrt(num / std::max(den, 1e-300));
        double budget = res.tail_estimate / std::max(res.term_l2_norms[0], 1e-300) + 5 * h * h;
        if (rel > budget) {
            std::ostringstream msg;
            msg << "duhamel-vs-direct error " << rel << " exceeds budget " << budget << " at t=" << t;
            failures.push_back(msg.str());
        }
        nlohmann::json row;
        row["t"] = t;
        row["relative_l2_error"] = rel;
        row["budget"] = budget;
        row["term_norms"] = res.term_l2_norms;
        row["tail_estimate"] = res.tail_estimate;
        rows.push_back(row);
        for (std::size_t j = 1; j + 1 < res.term_l2_norms.size(); ++j) {
            if (res.term_l2_norms[j] <= 2e-5 * res.term_l2_norms[0]) continue;
            if (res.term_l2_norms[j + 1] <= 2e-5 * res.term_l2_norms[0]) continue;
            double ratio = res.term_l2_norms[j + 1] / res.term_l2_norms[j];
            double shape = t < 1 ? 1.0 / t : 1.0 / std::sqrt(t);
            fitted_ratio_c = std::max(fitted_ratio_c, ratio / shape);
        }
    }
    if (!(fitted_ratio_c < 1.0))
        failures.push_back("term-norm ratio constant reached 1: series not contracting");

    nlohmann::json j = header_json(s);
    j["check"] = "duhamel-compare";
    j["rows"] = rows;
    j["fitted_ratio_constant"] = fitted_ratio_c;
    return finish(s, j, "duhamel_compare", failures.empty(), failures);
}

// --- estimate checks ------------------------------------------------------

int run_estimate(const Scenario& s, const std::string& kind) {
    EstimateContext ctx(s, s.resolution);
    EstimateReport rep = kind == "local"     ? local_estimate_check(ctx, s.p, s.k, s.r)
                         : kind == "global"  ? global_estimate_check(ctx, s.p, s.k, s.r)
                                             : classical_estimate_check(ctx, s.p, s.k, s.r);
    write_report_json(out_path(s, kind + "_check.json"), s, {rep});
    write_report_csv(out_path(s, kind + "_check.csv"), {rep});
    std::vector<double> ts, vals;
    for (const auto& row : rep.rows)
        if (row.lhs > 0) {
            ts.push_back(row.t);
            vals.push_back(row.lhs);
        }
    if (!ts.empty()) write_plot_data(out_path(s, kind + "_lhs.dat"), ts, vals);
    for (const auto& f : rep.failures) std::cerr << "FAIL: " << f << "\n";
    std::cout << (rep.pass ? "PASS " : "FAIL ") << kind << "-check"
              << " (c_small=" << rep.fitted_c_small << ", c_large=" << rep.fitted_c_large << ")\n";
    return rep.pass ? kExitPass : kExitFail;
}

int run_sweep(const Scenario& s, const std::string& resolutions_str, int jobs) {
    std::vector<int> resolutions;
    std::stringstream ss(resolutions_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) resolutions.push_back(std::stoi(tok));
    if (resolutions.empty()) resolutions = {16, 32};

    std::vector<int> ps{0, 1}, ks{0, 1, 2};
    std::vector<double> rs{1.0, 2.0, std::numeric_limits<double>::infinity()};
    (void)jobs; // sweeps stay deterministic; contexts are built sequentially
    SweepResult sweep = theorem_sweep(s, resolutions, ps, ks, rs, "local");

    write_report_json(out_path(s, "sweep.json"), s, sweep.reports);
    write_report_csv(out_path(s, "sweep.csv"), sweep.reports);
    for (const auto& f : sweep.failures) std::cerr << "FAIL: " << f << "\n";
    std::cout << (sweep.pass ? "PASS " : "FAIL ") << "sweep (" << sweep.reports.size()
              << " reports)\n";
    return sweep.pass ? kExitPass : kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat-semigroup smoothing estimates on chart metrics"};
    app.require_subcommand(1);

    CommonOpts o;
    int kc_n = 1;
    std::string kc_gamma = "1";
    auto* kernel = app.add_subcommand("kernel-check", "Euclidean kernel norm identities");
    kernel->add_option("--n", kc_n, "dimension")->check(CLI::Range(1, 3));
    kernel->add_option("--gamma", kc_gamma, "multi-index, comma separated");
    add_common(kernel, o); // --r doubles as the Lebesgue exponent here

    int radius_m = 1;
    auto* radius = app.add_subcommand("radius", "admissible radius field + variation checks");
    radius->add_option("--m", radius_m, "admissibility order");
    add_common(radius, o);

    int cover_m = 1;
    double divisor = kCoveringDivisor, dilation = kCoveringDilation;
    auto* cover = app.add_subcommand("cover", "Vitali covering + overlap bound");
    cover->add_option("--m", cover_m, "admissibility order");
    cover->add_option("--divisor", divisor, "candidate radius divisor (default 120)");
    cover->add_option("--dilation", dilation, "cover dilation (default 5)");
    add_common(cover, o);

    auto* dc = app.add_subcommand("duhamel-compare", "series vs matrix-exponential oracle");
    add_common(dc, o);
    auto* local = app.add_subcommand("local-check", "Theorem-m6 local estimates");
    add_common(local, o);
    auto* global = app.add_subcommand("global-check", "weighted global estimates");
    add_common(global, o);
    auto* classical = app.add_subcommand("classical-check", "unweighted classical estimates");
    add_common(classical, o);

    std::string resolutions = "16,32";
    auto* sweep = app.add_subcommand("sweep", "full (p,k,r) sweep with refinement stability");
    sweep->add_option("--resolutions", resolutions, "comma-separated grid sizes");
    add_common(sweep, o);

    CLI11_PARSE(app, argc, argv);

    try {
        Scenario s = resolve_scenario(o);
        if (kernel->parsed()) return run_kernel_check(kc_n, kc_gamma, o.r.empty() ? "1" : o.r, s);
        if (radius->parsed()) return run_radius(s, radius_m);
        if (cover->parsed()) return run_cover(s, cover_m, divisor, dilation);
        if (dc->parsed()) return run_duhamel_compare(s);
        if (local->parsed()) return run_estimate(s, "local");
        if (global->parsed()) return run_estimate(s, "global");
        if (classical->parsed()) return run_estimate(s, "classical");
        if (sweep->parsed()) return run_sweep(s, resolutions, o.jobs);
    } catch (const SeriesDivergence& e) {
        std::cerr << "refusal: " << e.what() << "\n";
        return kExitRefusal;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << "scenario schema: see docs/schemas.md\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
