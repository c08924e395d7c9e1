#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "torsionflow/flow.hpp"

namespace torsionflow {

/// Shortest round-trip decimal representation ("%.17g").
std::string format_double(double x);

/// Two-column numeric CSV; a non-numeric first line is treated as a header.
std::vector<std::array<double, 2>> read_csv_pairs(const std::filesystem::path& path);

/// Second column of a "theta,value" file.
std::vector<double> read_grid_values(const std::filesystem::path& path);

void write_support_csv(std::ostream& os, const SupportFunction& h);
void write_polyline_csv(std::ostream& os, const std::vector<Vec2>& points);

inline constexpr const char* kSeriesHeader =
    "t,dt,T,J,eta,min_h,max_h,min_rho,max_rho,min_q,residual_sup,clamps";
void write_series_csv(std::ostream& os, const std::vector<StepRecord>& series);

/// Resolved configuration with every default materialized.
nlohmann::json config_to_json(const FlowConfig& config);

/// Final run document: config echo, h samples, gamma, stop reason, diagnostics.
nlohmann::json result_to_json(const FlowResult& result, const FlowConfig& config);

}  // namespace torsionflow
