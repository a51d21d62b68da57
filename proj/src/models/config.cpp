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

#include <set>

#include "qforge/models.hpp"

namespace qforge {

using nlohmann::json;

namespace {

struct VariantName {
  Variant variant;
  const char* name;
};

constexpr VariantName kVariantNames[] = {
    {Variant::kDcqn, "dcqn"},
    {Variant::kDtqnVit, "dtqn_vit"},
    {Variant::kDtqnProj, "dtqn_proj"},
    {Variant::kConvTransformer, "conv_transformer"},
};

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("model." + msg);
}

}  // namespace

Variant parse_variant(const std::string& text) {
  for (const auto& v : kVariantNames)
    if (text == v.name) return v.variant;
  throw ConfigError("model.variant: unknown variant '" + text +
                    "' (expected dcqn, dtqn_vit, dtqn_proj or conv_transformer)");
}

const char* variant_name(Variant v) {
  for (const auto& n : kVariantNames)
    if (n.variant == v) return n.name;
  return "?";
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> kAll{Variant::kDcqn, Variant::kDtqnVit, Variant::kDtqnProj,
                                         Variant::kConvTransformer};
  return kAll;
}

std::size_t conv_chain_extent(std::size_t input, const std::vector<ConvSpec>& convs) {
  std::size_t extent = input;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto& c = convs[i];
    check(c.channels >= 1 && c.kernel >= 1 && c.stride >= 1,
          "convs[" + std::to_string(i) + "]: channels, kernel and stride must be positive");
    check(c.kernel <= extent, "convs[" + std::to_string(i) + "]: kernel " +
                                  std::to_string(c.kernel) + " exceeds input extent " +
                                  std::to_string(extent));
    extent = (extent - c.kernel) / c.stride + 1;
  }
  return extent;
}

std::size_t sequence_length(const ModelConfig& c) {
  switch (c.variant) {
    case Variant::kDcqn:
      return 0;
    case Variant::kDtqnVit:
      return c.frames * (c.height / c.patch) * (c.width / c.patch);
    case Variant::kDtqnProj:
      return c.frames;
    case Variant::kConvTransformer:
      return conv_chain_extent(c.height, c.convs) * conv_chain_extent(c.width, c.convs);
  }
  return 0;
}

ModelConfig ModelConfig::resolved() const {
  ModelConfig c = *this;
  check(c.actions >= 2, "actions: must be at least 2");
  check(c.frames >= 1, "frames: must be at least 1");
  check(c.height >= 1 && c.width >= 1, "height/width: must be positive");
  check(c.dropout >= 0.0 && c.dropout < 1.0, "dropout: must be in [0, 1)");

  const bool uses_convs = c.variant == Variant::kDcqn || c.variant == Variant::kConvTransformer;
  const bool uses_encoder = c.variant != Variant::kDcqn;
  if (uses_convs) {
    check(!c.convs.empty(), "convs: at least one conv layer required");
    conv_chain_extent(c.height, c.convs);
    conv_chain_extent(c.width, c.convs);
  }
  if (c.variant == Variant::kDcqn) {
    if (c.fc.empty()) c.fc = {512, 256};
    check(c.fc.size() == 2, "fc: dcqn needs exactly 2 hidden widths");
  } else if (c.variant == Variant::kDtqnVit) {
    if (c.fc.empty()) c.fc = {512, 256, 128};
    check(c.fc.size() == 3, "fc: dtqn_vit needs exactly 3 hidden widths");
    check(c.patch >= 1 && c.patch <= c.height && c.patch <= c.width,
          "patch: must lie in [1, min(height, width)]");
  } else {
    check(c.fc.empty(), std::string("fc: not used by ") + variant_name(c.variant));
  }
  for (std::size_t w : c.fc) check(w >= 1, "fc: widths must be positive");
  if (uses_encoder) {
    check(c.embed >= 1, "embed: must be positive");
    check(c.heads >= 1 && c.embed % c.heads == 0, "heads: embed " + std::to_string(c.embed) +
                                                      " not divisible by heads " +
                                                      std::to_string(c.heads));
    check(c.depth >= 1, "depth: encoder needs at least one layer");
    if (c.ff_dim == 0) c.ff_dim = 4 * c.embed;
  }
  return c;
}

json to_json(const ModelConfig& c) {
  json convs = json::array();
  for (const auto& s : c.convs) convs.push_back({s.channels, s.kernel, s.stride});
  return json{
      {"variant", variant_name(c.variant)},
      {"frames", c.frames},
      {"actions", c.actions},
      {"height", c.height},
      {"width", c.width},
      {"convs", convs},
      {"fc", c.fc},
      {"norm_order", c.norm_order == NormOrder::kBnRelu ? "bn_relu" : "relu_bn"},
      {"patch", c.patch},
      {"embed", c.embed},
      {"depth", c.depth},
      {"heads", c.heads},
      {"ff_dim", c.ff_dim},
      {"dropout", c.dropout},
      {"gate_mode", nn::gate_mode_name(c.gate_mode)},
      {"seed", c.seed},
  };
}

namespace {

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("model." + key + ": invalid value " + j.dump());
  }
}

std::size_t get_size(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ConfigError("model." + key + ": expected a non-negative integer, got " + j.dump());
  return j.get<std::size_t>();
}

}  // namespace

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
  if (!j.is_object()) throw ConfigError("model: expected an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "variant") {
      c.variant = parse_variant(get_as<std::string>(v, key));
    } else if (key == "frames") {
      c.frames = get_size(v, key);
    } else if (key == "actions") {
      c.actions = get_size(v, key);
    } else if (key == "height") {
      c.height = get_size(v, key);
    } else if (key == "width") {
      c.width = get_size(v, key);
    } else if (key == "convs") {
      if (!v.is_array()) throw ConfigError("model.convs: expected [[channels, kernel, stride], ...]");
      c.convs.clear();
      for (const auto& e : v) {
        if (!e.is_array() || e.size() != 3)
          throw ConfigError("model.convs: expected [channels, kernel, stride], got " + e.dump());
        c.convs.push_back({get_size(e[0], key), get_size(e[1], key), get_size(e[2], key)});
      }
    } else if (key == "fc") {
      if (!v.is_array()) throw ConfigError("model.fc: expected an array of widths");
      c.fc.clear();
      for (const auto& e : v) c.fc.push_back(get_size(e, key));
    } else if (key == "norm_order") {
      const auto s = get_as<std::string>(v, key);
      if (s == "bn_relu") {
        c.norm_order = NormOrder::kBnRelu;
      } else if (s == "relu_bn") {
        c.norm_order = NormOrder::kReluBn;
      } else {
        throw ConfigError("model.norm_order: expected bn_relu or relu_bn, got '" + s + "'");
      }
    } else if (key == "patch") {
      c.patch = get_size(v, key);
    } else if (key == "embed") {
      c.embed = get_size(v, key);
    } else if (key == "depth") {
      c.depth = get_size(v, key);
    } else if (key == "heads") {
      c.heads = get_size(v, key);
    } else if (key == "ff_dim") {
      c.ff_dim = get_size(v, key);
    } else if (key == "dropout") {
      if (!v.is_number()) throw ConfigError("model.dropout: expected a number");
      c.dropout = v.get<double>();
    } else if (key == "gate_mode") {
      c.gate_mode = nn::parse_gate_mode(get_as<std::string>(v, key));
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, key);
    } else {
      throw ConfigError("model." + key + ": unknown key");
    }
  }
  return c;
}

}  // namespace qforge
