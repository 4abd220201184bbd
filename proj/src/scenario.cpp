#include "heatforms/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

namespace heatforms {

void Scenario::validate() const {
    if (resolution < 8 || resolution > 64)
        throw std::invalid_argument("scenario: resolution must lie in [8, 64]");
    if (!(epsilon > 0 && epsilon <= 0.2))
        throw std::invalid_argument("scenario: epsilon must lie in (0, 0.2]");
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("scenario: delta must lie in (0,1)");
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("scenario: dimension out of range");
    if (p < 0 || p > n) throw std::invalid_argument("scenario: p must lie in [0, n]");
    if (k < 0) throw std::invalid_argument("scenario: k must be >= 0");
    if (!std::isinf(r) && r < 1) throw std::invalid_argument("scenario: r must be in [1, inf]");
    if (name != "flat-torus" && name != "sphere-chart" && name != "perturbed-euclidean" &&
        name != "file")
        throw std::invalid_argument("scenario: unknown builtin '" + name + "'");
    if (name == "sphere-chart" && n != 2)
        throw std::invalid_argument("scenario: sphere-chart is two-dimensional");
}

ChartMetric Scenario::build_metric(int res) const {
    if (name == "file") return load_metric_json(metric_file);
    if (name == "flat-torus") {
        GridBox box(n, std::vector<double>(n, 0.0), std::vector<double>(n, 2 * M_PI),
                    std::vector<int>(n, res), true);
        return ChartMetric::flat(box);
    }
    if (name == "perturbed-euclidean") {
        GridBox box(n, std::vector<double>(n, 0.0), std::vector<double>(n, 2 * M_PI),
                    std::vector<int>(n, res), true);
        std::string factor;
        for (int a = 1; a <= n; ++a) {
            if (!factor.empty()) factor += "*";
            factor += "sin(" + std::to_string(frequency) + "*x" + std::to_string(a) + ")";
        }
        std::ostringstream diag;
        diag.precision(17);
        diag << "1+" << amplitude << "*" << factor;
        std::vector<std::vector<std::string>> g(n, std::vector<std::string>(n, "0"));
        for (int i = 0; i < n; ++i) g[i][i] = diag.str();
        return ChartMetric::analytic(box, g);
    }
    // sphere-chart: equatorial band of the unit sphere
    GridBox box(2, {M_PI / 2 - 0.7, 0.2}, {M_PI / 2 + 0.7, 1.6}, {res, res}, false);
    return ChartMetric::analytic(box, {{"1", "0"}, {"0", "sin(x1)^2"}});
}

std::vector<double> Scenario::t_grid_small() const {
    // interior of (δ, 1); keep clear of both endpoints
    double lo = delta * 1.1, hi = 0.97;
    std::vector<double> t(t_points_small);
    for (int i = 0; i < t_points_small; ++i)
        t[i] = lo * std::pow(hi / lo, i / double(t_points_small - 1));
    return t;
}

std::vector<double> Scenario::t_grid_large() const {
    std::vector<double> t(t_points_large);
    for (int i = 0; i < t_points_large; ++i)
        t[i] = std::pow(t_max, i / double(t_points_large - 1));
    return t;
}

std::string Scenario::canonical_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["metric_file"] = metric_file;
    j["n"] = n;
    j["resolution"] = resolution;
    j["amplitude"] = amplitude;
    j["frequency"] = frequency;
    j["p"] = p;
    j["k"] = k;
    j["r"] = std::isinf(r) ? nlohmann::json("inf") : nlohmann::json(r);
    j["epsilon"] = epsilon;
    j["delta"] = delta;
    j["series_order"] = series_order;
    j["quad_nodes"] = quad_nodes;
    j["seed"] = seed;
    j["t_points_small"] = t_points_small;
    j["t_points_large"] = t_points_large;
    j["t_max"] = t_max;
    return j.dump(); // nlohmann objects are key-sorted: stable bytes
}

std::uint64_t Scenario::hash() const {
    std::string s = canonical_json();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Scenario scenario_from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Scenario s;
    s.name = j.value("name", s.name);
    s.metric_file = j.value("metric_file", s.metric_file);
    s.n = j.value("n", s.n);
    s.resolution = j.value("resolution", s.resolution);
    s.amplitude = j.value("amplitude", s.amplitude);
    s.frequency = j.value("frequency", s.frequency);
    s.p = j.value("p", s.p);
    s.k = j.value("k", s.k);
    if (j.contains("r")) {
        if (j["r"].is_string()) {
            std::string rs = j["r"].get<std::string>();
            if (rs != "inf") throw std::invalid_argument("scenario: r must be a number or \"inf\"");
            s.r = std::numeric_limits<double>::infinity();
        } else {
            s.r = j["r"].get<double>();
        }
    }
    s.epsilon = j.value("epsilon", s.epsilon);
    s.delta = j.value("delta", s.delta);
    s.series_order = j.value("series_order", s.series_order);
    s.quad_nodes = j.value("quad_nodes", s.quad_nodes);
    s.seed = j.value("seed", s.seed);
    s.t_points_small = j.value("t_points_small", s.t_points_small);
    s.t_points_large = j.value("t_points_large", s.t_points_large);
    s.t_max = j.value("t_max", s.t_max);
    s.output_dir = j.value("output_dir", s.output_dir);
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

Scenario builtin_scenario(const std::string& name, int n) {
    Scenario s;
    s.name = name;
    s.n = name == "sphere-chart" ? 2 : n;
    if (name == "perturbed-euclidean") s.amplitude = 0.02;
    s.validate();
    return s;
}

namespace {

// C^∞ cutoff supported on |s| < 1
double bump_cutoff(double s) {
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

GridFunction scalar_bump(const GridBox& box, const std::vector<double>& c, double sigma) {
    return GridFunction(box, [&](const std::vector<double>& x) {
        double q = 0;
        for (int a = 0; a < box.n; ++a) {
            double d = x[a] - c[a];
            if (box.periodic) {
                double L = box.hi[a] - box.lo[a];
                d = std::remainder(d, L);
            }
            q += d * d;
        }
        return std::exp(-q / (2 * sigma * sigma));
    });
}

GridFunction fourier_mode(const GridBox& box, int kx) {
    return GridFunction(box, [&](const std::vector<double>& x) {
        double v = std::sin(kx * x[0]);
        for (int a = 1; a < box.n; ++a) v *= std::cos(x[a]);
        return v;
    });
}

GridFunction band_limited_random(const GridBox& box, std::mt19937& rng) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0, 2 * M_PI);
    struct Mode {
        std::vector<int> k;
        double a, ph;
    };
    std::vector<Mode> modes;
    std::vector<int> k(box.n, 0);
    // all wave vectors with |k_a| <= 2, deterministic order
    std::function<void(int)> rec = [&](int axis) {
        if (axis == box.n) {
            modes.push_back({k, amp(rng), phase(rng)});
            return;
        }
        for (int v = -2; v <= 2; ++v) {
            k[axis] = v;
            rec(axis + 1);
        }
    };
    rec(0);
    return GridFunction(box, [&](const std::vector<double>& x) {
        double s = 0;
        for (const auto& m : modes) {
            double arg = m.ph;
            for (int a = 0; a < box.n; ++a) arg += m.k[a] * x[a];
            s += m.a * std::cos(arg);
        }
        return s / modes.size();
    });
}

void apply_cutoff(FormField& f, const AdmissibleBall& ball) {
    const GridBox& box = f.box;
    for (auto& comp : f.coeffs)
        for (std::size_t p = 0; p < comp.size(); ++p) {
            double d = box.distance(box.point(p), ball.center);
            comp.values[p] *= bump_cutoff(d / ball.radius);
        }
}

} // namespace

std::vector<FormField> build_corpus(const ChartMetric& metric, int p, unsigned seed,
                                    const AdmissibleBall* support) {
    const GridBox& box = metric.domain();
    std::mt19937 rng(seed);
    std::vector<double> center(box.n);
    for (int a = 0; a < box.n; ++a) center[a] = 0.5 * (box.lo[a] + box.hi[a]);
    if (support) center = support->center;
    double sigma = support ? support->radius / 3.0 : 0.6;

    std::vector<FormField> corpus;
    if (p == 0) {
        FormField bump(0, box);
        bump.coeffs[0] = scalar_bump(box, center, sigma);
        corpus.push_back(bump);

        FormField mode(0, box);
        mode.coeffs[0] = fourier_mode(box, 1);
        corpus.push_back(mode);

        FormField rnd(0, box);
        rnd.coeffs[0] = band_limited_random(box, rng);
        corpus.push_back(rnd);
    } else {
        // exact form d(bump): exercises the image of d
        GridFunction h = scalar_bump(box, center, sigma);
        FormField exact(p, box);
        if (p == 1) {
            for (int a = 0; a < box.n; ++a) exact.coeffs[a] = finite_difference(h, a, 1);
        } else {
            exact.coeffs[0] = h; // higher-degree seed component
        }
        corpus.push_back(exact);

        // non-exact single mode
        FormField mode(p, box);
        mode.coeffs[0] = fourier_mode(box, 1);
        corpus.push_back(mode);

        FormField rnd(p, box);
        for (auto& c : rnd.coeffs) c = band_limited_random(box, rng);
        corpus.push_back(rnd);
    }
    if (support)
        for (auto& f : corpus) apply_cutoff(f, *support);
    for (const auto& f : corpus) f.validate_finite();
    return corpus;
}

} // namespace heatforms
