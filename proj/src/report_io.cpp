#include "heatforms/report_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace heatforms {

namespace {

nlohmann::json row_json(const EstimateRow& row) {
    nlohmann::json j;
    j["t"] = row.t;
    j["regime"] = row.regime;
    j["lhs"] = row.lhs;
    j["shape"] = row.shape;
    j["ratio"] = row.ratio;
    j["verified"] = row.verified;
    j["crosscheck_error"] = row.crosscheck_error;
    j["crosscheck_budget"] = row.crosscheck_budget;
    return j;
}

nlohmann::json report_entry(const EstimateReport& rep) {
    nlohmann::json j;
    j["scenario"] = rep.scenario_id;
    j["check"] = rep.check;
    j["scenario_hash"] = rep.scenario_hash;
    j["p"] = rep.p;
    j["k"] = rep.k;
    j["r"] = std::isinf(rep.r) ? nlohmann::json("inf") : nlohmann::json(rep.r);
    j["epsilon"] = rep.epsilon;
    j["delta"] = rep.delta;
    j["resolution"] = rep.resolution;
    j["convention"] = rep.convention;
    j["fitted_c_small"] = rep.fitted_c_small;
    j["fitted_c_large"] = rep.fitted_c_large;
    j["fitted_slope_large"] = rep.fitted_slope_large;
    j["slope_residual"] = rep.slope_residual;
    j["eta"] = rep.eta;
    j["ricci_bound"] = rep.ricci_bound;
    j["classical_constant"] = rep.classical_constant;
    j["classical_regime"] = rep.classical_regime;
    j["unverified_rows"] = rep.unverified_rows;
    j["pass"] = rep.pass;
    j["failures"] = rep.failures;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : rep.rows) rows.push_back(row_json(row));
    j["rows"] = rows;
    return j;
}

} // namespace

std::string report_json(const Scenario& scenario, const std::vector<EstimateReport>& reports) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["scenario"] = nlohmann::json::parse(scenario.canonical_json());
    j["scenario_hash"] = scenario.hash();
    j["seed"] = scenario.seed;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : reports) reps.push_back(report_entry(r));
    j["reports"] = reps;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

void write_report_json(const std::string& path, const Scenario& scenario,
                       const std::vector<EstimateReport>& reports) {
    write_text_file(path, report_json(scenario, reports));
}

std::string report_csv(const std::vector<EstimateReport>& reports) {
    std::ostringstream out;
    out.precision(17);
    out << "scenario,check,resolution,p,k,r,epsilon,delta,t,regime,lhs,shape,ratio,verified\n";
    for (const auto& rep : reports)
        for (const auto& row : rep.rows) {
            out << rep.scenario_id << ',' << rep.check << ',' << rep.resolution << ',' << rep.p
                << ',' << rep.k << ',';
            if (std::isinf(rep.r)) out << "inf";
            else out << rep.r;
            out << ',' << rep.epsilon << ',' << rep.delta << ',' << row.t << ',' << row.regime
                << ',' << row.lhs << ',' << row.shape << ',' << row.ratio << ','
                << (row.verified ? 1 : 0) << '\n';
        }
    return out.str();
}

void write_report_csv(const std::string& path, const std::vector<EstimateReport>& reports) {
    write_text_file(path, report_csv(reports));
}

void write_plot_data(const std::string& path, const std::vector<double>& t,
                     const std::vector<double>& values) {
    if (t.size() != values.size())
        throw std::invalid_argument("write_plot_data: size mismatch");
    std::ostringstream out;
    out.precision(17);
    out << "# log10(t) log10(value)\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0) || !(values[i] > 0))
            throw std::invalid_argument("write_plot_data: positive data required");
        out << std::log10(t[i]) << ' ' << std::log10(values[i]) << '\n';
    }
    write_text_file(path, out.str());
}

} // namespace heatforms
