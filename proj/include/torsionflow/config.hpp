#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "torsionflow/flow.hpp"

namespace torsionflow {

/// Reads a JSON config; table paths resolve against the file's directory.
/// Throws ConfigError naming the offending field.
FlowConfig parse_config(const std::filesystem::path& path);

FlowConfig parse_config_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

}  // namespace torsionflow
