#pragma once

#include <string>
#include <vector>

#include "gaitattn/audit.hpp"

namespace gaitattn {

// Combined audit report JSON: importance map, flags and (optionally) the
// metrics report produced by the metrics module. Pass an empty string when
// metrics are unavailable (e.g. single-class test split).
std::string audit_report_json(const SensorImportanceMap& map,
                              const std::vector<BiasFlag>& flags,
                              const std::string& metrics_json);

// Self-contained SVG bar chart: one bar per sensor in HE/LB/LF/RF order,
// heights are mean attention, whiskers are the CI bounds, flagged sensors
// are marked. Byte-identical output for identical inputs.
std::string importance_map_svg(const SensorImportanceMap& map,
                               const std::vector<BiasFlag>& flags);

// Writes report.json and importance.svg under out_dir.
void render_report(const SensorImportanceMap& map, const std::vector<BiasFlag>& flags,
                   const std::string& metrics_json, const std::string& out_dir);

}  // namespace gaitattn
