#pragma once

#include <map>
#include <string>
#include <vector>

#include "ivlab/panel.hpp"
#include "ivlab/pipeline.hpp"
#include "ivlab/provider.hpp"

namespace ivlab {

struct DataSettings {
  std::string metadata;  // name,description,unit CSV; empty keeps bare names
  PanelSchema schema;
};

struct RunSettings {
  std::string output_dir = ".";
  std::string prompts_dir;  // empty uses the built-in templates
};

struct AppConfig {
  PipelineConfig pipeline;
  ProviderSettings provider;
  DataSettings data;
  RunSettings run;
};

/// Every recognised "section.key".
const std::vector<std::string>& config_keys();

/// Sets one "section.key" from its text form. Throws Config for unknown keys
/// or malformed values.
void apply_setting(AppConfig& cfg, const std::string& key, const std::string& value);

/// Reads an INI file (sections per module, key = value), then applies
/// `overrides`. Unknown keys and a missing provider.kind raise Config.
AppConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});

/// Builds a config from overrides alone; provider.kind is still required.
AppConfig config_from_settings(const std::map<std::string, std::string>& settings);

/// Flattened "section.key" -> value view of every setting.
std::map<std::string, std::string> config_snapshot(const AppConfig& cfg);

}  // namespace ivlab
