#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heatforms/admissible.hpp"
#include "heatforms/chart_metric.hpp"
#include "heatforms/form_field.hpp"

namespace heatforms {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1";

/// A named experiment: metric source, grid resolution, the (p,k,r,ε,δ,J)
/// parameter block and the t grids. Everything is echoed into every output.
struct Scenario {
    std::string name = "flat-torus"; // flat-torus | sphere-chart | perturbed-euclidean | file
    std::string metric_file;         // when name == "file"
    int n = 2;
    int resolution = 16; // per axis, in [8, 64]
    double amplitude = 0.02;
    int frequency = 1;
    int p = 0;
    int k = 1;
    double r = 2; // may be INFINITY (spelled "inf" in JSON)
    double epsilon = 0.05;
    double delta = 0.25;
    int series_order = 2; // J
    int quad_nodes = 10;
    unsigned seed = 42;
    int t_points_small = 12;
    int t_points_large = 12;
    double t_max = 20;
    std::string output_dir = ".";

    void validate() const;
    ChartMetric build_metric() const { return build_metric(resolution); }
    ChartMetric build_metric(int resolution_override) const;
    std::vector<double> t_grid_small() const; // log-spaced interior of (δ, 1)
    std::vector<double> t_grid_large() const; // log-spaced [1, t_max]
    std::string canonical_json() const;       // stable key order, for hashing
    std::uint64_t hash() const;               // FNV-1a of canonical_json()
};

Scenario scenario_from_json_text(const std::string& text);
Scenario load_scenario(const std::string& path);
Scenario builtin_scenario(const std::string& name, int n = 2);

/// Deterministic initial-data corpus: a Gaussian bump, a single Fourier mode
/// and a band-limited random field; for p = 1 additionally an exact form df
/// and a non-exact mode. When `support` is given every element is multiplied
/// by a smooth cutoff vanishing outside the ball.
std::vector<FormField> build_corpus(const ChartMetric& metric, int p, unsigned seed,
                                    const AdmissibleBall* support = nullptr);

} // namespace heatforms
