// Copyright 2026 The qforge Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration: environment, seed, agent and model settings, assembled
// from a named preset, a JSON file and dotted key=value overrides.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qforge/agent.hpp"

namespace qforge {

class UnknownPresetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct RunConfig {
  std::string env = "catch";
  std::uint64_t seed = 42;  // drives the agent, the model initializer and the env
  std::string description;
  AgentConfig agent;
  ModelConfig model;  // resolved
};

// Every value, including derived ones (model.actions, ff_dim, fc widths).
nlohmann::json to_json(const RunConfig& c);

// Keys: env, seed, description, agent{...}, model{...}. Unknown keys,
// agent.seed and model.seed are rejected. A missing model.actions is taken
// from the environment.
RunConfig run_config_from_json(const nlohmann::json& j);

const std::vector<std::string>& preset_names();
// Throws UnknownPresetError listing the available names.
nlohmann::json preset_json(const std::string& name);

// Sets a dotted path ("agent.lr=3e-4") in j. The value is read as JSON when
// it parses, otherwise as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

struct RunConfigSources {
  std::optional<std::string> preset;
  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
};

// "<version> (<git revision>)" of this build.
std::string version_string();

// preset, then the file (merge patch), then overrides, then seed/episodes.
RunConfig resolve_run_config(const RunConfigSources& sources);

}  // namespace qforge
