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

#include "qforge/config.hpp"

#include <fstream>
#include <sstream>

#include "config/presets.hpp"

#ifndef QFORGE_VERSION
#define QFORGE_VERSION "0.0.0"
#endif
#ifndef QFORGE_REVISION
#define QFORGE_REVISION "unknown"
#endif

namespace qforge {

using nlohmann::json;

std::string version_string() { return std::string(QFORGE_VERSION) + " (" + QFORGE_REVISION + ")"; }

json to_json(const RunConfig& c) {
  json agent = to_json(c.agent);
  agent.erase("seed");
  json model = to_json(c.model);
  model.erase("seed");
  json j{{"env", c.env}, {"seed", c.seed}, {"agent", agent}, {"model", model}};
  if (!c.description.empty()) j["description"] = c.description;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;
  json agent = json::object(), model = json::object();
  for (const auto& [key, v] : j.items()) {
    if (key == "env") {
      if (!v.is_string()) throw ConfigError("env: expected a string, got " + v.dump());
      c.env = v.get<std::string>();
    } else if (key == "seed") {
      if (!v.is_number_unsigned())
        throw ConfigError("seed: expected a non-negative integer, got " + v.dump());
      c.seed = v.get<std::uint64_t>();
    } else if (key == "description") {
      if (!v.is_string()) throw ConfigError("description: expected a string");
      c.description = v.get<std::string>();
    } else if (key == "agent") {
      agent = v;
    } else if (key == "model") {
      model = v;
    } else {
      throw ConfigError(key + ": unknown key (expected env, seed, description, agent, model)");
    }
  }
  if (agent.is_object() && agent.contains("seed"))
    throw ConfigError("agent.seed: set the top-level seed instead");
  if (model.is_object() && model.contains("seed"))
    throw ConfigError("model.seed: set the top-level seed instead");

  const auto actions = env_action_count(c.env);
  if (!actions) throw ConfigError("env: unknown environment '" + c.env + "'");
  c.agent = agent_config_from_json(agent);
  c.agent.seed = c.seed;
  ModelConfig m;
  m.actions = *actions;
  m = model_config_from_json(model, m);
  m.seed = c.seed;
  if (m.actions != *actions)
    throw ConfigError("model.actions: " + std::to_string(m.actions) + " but env '" + c.env +
                      "' has " + std::to_string(*actions) + " actions");
  c.model = m.resolved();
  c.agent.validate();
  return c;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const auto& p : detail::embedded_presets()) names.push_back(p.name);
    return names;
  }();
  return kNames;
}

json preset_json(const std::string& name) {
  for (const auto& p : detail::embedded_presets())
    if (p.name == name) return json::parse(p.json);
  std::string list;
  for (const auto& n : preset_names()) list += "\n  " + n;
  throw UnknownPresetError("unknown preset '" + name + "'; available presets:" + list);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set: expected key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("--set: empty path segment in '" + path + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

RunConfig resolve_run_config(const RunConfigSources& s) {
  json j = json::object();
  if (s.preset) j = preset_json(*s.preset);
  if (s.config_file) {
    std::ifstream in(*s.config_file);
    if (!in) throw ConfigError("--config: cannot open " + s.config_file->string());
    std::stringstream text;
    text << in.rdbuf();
    const json file = json::parse(text.str(), nullptr, false);
    if (file.is_discarded())
      throw ConfigError("--config: " + s.config_file->string() + " is not valid JSON");
    j.merge_patch(file);
  }
  for (const auto& o : s.overrides) apply_override(j, o);
  if (s.seed) j["seed"] = *s.seed;
  if (s.episodes) j["agent"]["episodes"] = *s.episodes;
  return run_config_from_json(j);
}

}  // namespace qforge
