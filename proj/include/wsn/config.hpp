#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wsn/engine.hpp"

namespace wsn {

using Json = nlohmann::json;

/// Built-in parameter sets: "table1", "table2", "delay_study".
SimConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Full, explicit JSON form of a config (every key written).
Json config_to_json(const SimConfig& config);

/// Builds a config from JSON: defaults, then the named preset (if any), then
/// every key of `j`. Unknown keys and type mismatches raise ConfigError naming
/// the dotted key path. The result is validated.
SimConfig config_from_json(const Json& j);

/// Layers `overlay` on top of `base` (nested objects merge key by key).
Json merge_json(Json base, const Json& overlay);

/// Reads a JSON config file; `overrides` (e.g. command-line flags) take
/// precedence over the file, which takes precedence over the preset. A config
/// must name a preset or give region, node_count, coverage_radius and episodes.
SimConfig load_config(const std::string& path, const Json& overrides = Json::object());

/// Same rules as load_config, from an in-memory document.
SimConfig parse_config(const std::string& text, const Json& overrides = Json::object());

}  // namespace wsn
