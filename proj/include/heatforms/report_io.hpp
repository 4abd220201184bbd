#pragma once

#include <string>
#include <vector>

#include "heatforms/estimates.hpp"
#include "heatforms/scenario.hpp"

namespace heatforms {

/// Report JSON: schema_version, artifact_version, scenario echo + hash, one
/// entry per EstimateReport. Key order is stable, so outputs are
/// byte-identical across runs with the same scenario.
std::string report_json(const Scenario& scenario, const std::vector<EstimateReport>& reports);
void write_report_json(const std::string& path, const Scenario& scenario,
                       const std::vector<EstimateReport>& reports);

/// CSV: one row per (scenario, check, p, k, r, t).
std::string report_csv(const std::vector<EstimateReport>& reports);
void write_report_csv(const std::string& path, const std::vector<EstimateReport>& reports);

/// Two-column plot data (log t, log value), tool-agnostic.
void write_plot_data(const std::string& path, const std::vector<double>& t,
                     const std::vector<double>& values);

void write_text_file(const std::string& path, const std::string& content);

} // namespace heatforms
