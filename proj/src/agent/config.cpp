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

#include <cmath>

#include "qforge/agent.hpp"

namespace qforge {

using nlohmann::json;

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("agent." + msg);
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("agent." + key + ": expected a number, got " + j.dump());
  return j.get<double>();
}

std::size_t get_size(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ConfigError("agent." + key + ": expected a non-negative integer, got " + j.dump());
  return j.get<std::size_t>();
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("agent." + key + ": expected a string, got " + j.dump());
  return j.get<std::string>();
}

}  // namespace

LossMode parse_loss_mode(const std::string& text) {
  if (text == "huber") return LossMode::kHuber;
  if (text == "mse") return LossMode::kMse;
  if (text == "auto") return LossMode::kAuto;
  throw ConfigError("agent.loss_mode: expected huber, mse or auto, got '" + text + "'");
}

const char* loss_mode_name(LossMode m) {
  switch (m) {
    case LossMode::kHuber:
      return "huber";
    case LossMode::kMse:
      return "mse";
    case LossMode::kAuto:
      return "auto";
  }
  return "?";
}

const char* loss_kind_name(LossKind k) { return k == LossKind::kHuber ? "huber" : "mse"; }

ReplayMode parse_replay_mode(const std::string& text) {
  if (text == "flat") return ReplayMode::kFlat;
  if (text == "sequence") return ReplayMode::kSequence;
  throw ConfigError("agent.replay: expected flat or sequence, got '" + text + "'");
}

const char* replay_mode_name(ReplayMode m) {
  return m == ReplayMode::kFlat ? "flat" : "sequence";
}

void AgentConfig::validate() const {
  check(std::isfinite(lr) && lr > 0.0, "lr: must be positive");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma: must lie in [0, 1]");
  check(batch_size >= 1, "batch_size: must be at least 1");
  check(replay_capacity >= 1, "replay_capacity: must be at least 1");
  check(target_sync >= 1, "target_sync: must be at least 1");
  check(episodes >= 1, "episodes: must be at least 1");
  check(eps_start > 0.0 && eps_start <= 1.0, "eps_start: must lie in (0, 1]");
  check(eps_end > 0.0 && eps_end <= eps_start, "eps_end: must lie in (0, eps_start]");
  check(weight_decay >= 0.0, "weight_decay: must be non-negative");
  check(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1: must lie in [0, 1)");
  check(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2: must lie in [0, 1)");
  check(adam_eps > 0.0, "adam_eps: must be positive");
  check(huber_delta > 0.0, "huber_delta: must be positive");
  check(eval_episodes >= 1, "eval_episodes: must be at least 1");
  check(loss_window >= 2, "loss_window: must be at least 2");
  check(tau_flat > 0.0, "tau_flat: must be positive");
  check(tau_vol > 0.0, "tau_vol: must be positive");
  check(grad_clip >= 0.0, "grad_clip: must be non-negative");
  if (replay == ReplayMode::kSequence) {
    check(seq_len >= 1, "seq_len: must be at least 1");
    check(seq_batch >= 1, "seq_batch: must be at least 1");
    check(seq_batch * seq_len >= 2, "seq_batch * seq_len: must be at least 2");
  } else {
    check(batch_size >= 2, "batch_size: must be at least 2 (batch statistics)");
    check(replay_capacity >= batch_size, "replay_capacity: smaller than batch_size");
  }
}

json to_json(const AgentConfig& c) {
  return json{
      {"lr", c.lr},
      {"gamma", c.gamma},
      {"batch_size", c.batch_size},
      {"replay_capacity", c.replay_capacity},
      {"target_sync", c.target_sync},
      {"episodes", c.episodes},
      {"eps_start", c.eps_start},
      {"eps_end", c.eps_end},
      {"weight_decay", c.weight_decay},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"adam_eps", c.adam_eps},
      {"loss_mode", loss_mode_name(c.loss_mode)},
      {"huber_delta", c.huber_delta},
      {"eval_period", c.eval_period},
      {"eval_episodes", c.eval_episodes},
      {"loss_window", c.loss_window},
      {"tau_flat", c.tau_flat},
      {"tau_vol", c.tau_vol},
      {"warmup", c.warmup},
      {"grad_clip", c.grad_clip},
      {"replay", replay_mode_name(c.replay)},
      {"seq_len", c.seq_len},
      {"seq_batch", c.seq_batch},
      {"seed", c.seed},
  };
}

AgentConfig agent_config_from_json(const json& j, AgentConfig c) {
  if (!j.is_object()) throw ConfigError("agent: expected an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "lr") {
      c.lr = get_number(v, key);
    } else if (key == "gamma") {
      c.gamma = get_number(v, key);
    } else if (key == "batch_size") {
      c.batch_size = get_size(v, key);
    } else if (key == "replay_capacity") {
      c.replay_capacity = get_size(v, key);
    } else if (key == "target_sync") {
      c.target_sync = get_size(v, key);
    } else if (key == "episodes") {
      c.episodes = get_size(v, key);
    } else if (key == "eps_start") {
      c.eps_start = get_number(v, key);
    } else if (key == "eps_end") {
      c.eps_end = get_number(v, key);
    } else if (key == "weight_decay") {
      c.weight_decay = get_number(v, key);
    } else if (key == "adam_beta1") {
      c.adam_beta1 = get_number(v, key);
    } else if (key == "adam_beta2") {
      c.adam_beta2 = get_number(v, key);
    } else if (key == "adam_eps") {
      c.adam_eps = get_number(v, key);
    } else if (key == "loss_mode") {
      c.loss_mode = parse_loss_mode(get_string(v, key));
    } else if (key == "huber_delta") {
      c.huber_delta = get_number(v, key);
    } else if (key == "eval_period") {
      c.eval_period = get_size(v, key);
    } else if (key == "eval_episodes") {
      c.eval_episodes = get_size(v, key);
    } else if (key == "loss_window") {
      c.loss_window = get_size(v, key);
    } else if (key == "tau_flat") {
      c.tau_flat = get_number(v, key);
    } else if (key == "tau_vol") {
      c.tau_vol = get_number(v, key);
    } else if (key == "warmup") {
      c.warmup = get_size(v, key);
    } else if (key == "grad_clip") {
      c.grad_clip = get_number(v, key);
    } else if (key == "replay") {
      c.replay = parse_replay_mode(get_string(v, key));
    } else if (key == "seq_len") {
      c.seq_len = get_size(v, key);
    } else if (key == "seq_batch") {
      c.seq_batch = get_size(v, key);
    } else if (key == "seed") {
      c.seed = get_size(v, key);
    } else {
      throw ConfigError("agent." + key + ": unknown key");
    }
  }
  return c;
}

}  // namespace qforge
