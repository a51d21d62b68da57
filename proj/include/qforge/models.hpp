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

// Q-networks mapping stacked preprocessed frames to one value per action.
//
//   dcqn              conv stack with batch norm, three fully connected layers
//   dtqn_vit          p x p patch tokens over all frames, gated encoder, MLP head
//   dtqn_proj         one token per frame, gated encoder, attention pooling
//   conv_transformer  conv features, one token per spatial position, encoder
//
// Every variant accepts [B, F, H, W]. dtqn_vit also accepts [B, F*H*W] and
// dtqn_proj also accepts [B, F, H*W].

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "qforge/nn/transformer.hpp"

namespace qforge {

enum class Variant { kDcqn, kDtqnVit, kDtqnProj, kConvTransformer };

Variant parse_variant(const std::string& text);
const char* variant_name(Variant v);
const std::vector<Variant>& all_variants();

struct ConvSpec {
  std::size_t channels;
  std::size_t kernel;
  std::size_t stride;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

enum class NormOrder { kBnRelu, kReluBn };

struct ModelConfig {
  Variant variant = Variant::kDcqn;
  std::size_t frames = 4;
  std::size_t actions = 3;
  std::size_t height = 84;
  std::size_t width = 84;
  std::vector<ConvSpec> convs{{32, 8, 4}, {64, 4, 2}, {64, 3, 1}};
  // Hidden widths before the output layer. Empty selects the variant
  // default: two for dcqn, three for dtqn_vit; unused by the others.
  std::vector<std::size_t> fc;
  NormOrder norm_order = NormOrder::kBnRelu;
  std::size_t patch = 16;
  std::size_t embed = 128;
  std::size_t depth = 2;
  std::size_t heads = 4;
  std::size_t ff_dim = 0;  // 0 means 4 * embed
  double dropout = 0.0;
  nn::GateMode gate_mode = nn::GateMode::kLiteral;
  std::uint64_t seed = 42;

  // Fills variant defaults and checks every invariant; throws ConfigError.
  ModelConfig resolved() const;
};

nlohmann::json to_json(const ModelConfig& c);
// Keys absent from j keep their defaults; unknown keys throw ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

class QNetwork : public nn::Module {
 public:
  explicit QNetwork(const ModelConfig& config) : config_(config.resolved()) {}

  // Returns Q-values [B, actions].
  virtual Tensor forward(const Tensor& input) = 0;

  const ModelConfig& config() const { return config_; }

 protected:
  // Validates the input and returns it as [B, F, H, W].
  Tensor as_frames(const Tensor& input) const;

  ModelConfig config_;
};

std::unique_ptr<QNetwork> make_model(const ModelConfig& config);

// Output extent of a conv stack over one spatial axis; throws ConfigError if
// a kernel does not fit.
std::size_t conv_chain_extent(std::size_t input, const std::vector<ConvSpec>& convs);

// Number of tokens the encoder sees (0 for dcqn).
std::size_t sequence_length(const ModelConfig& config);

// ---- checkpoints -----------------------------------------------------------
//
// Layout (little-endian):
//   8 bytes  magic "QFGCKPT\0"
//   u32      format version
//   u64      manifest length n
//   n bytes  UTF-8 JSON manifest {"model": config, "tensors": [{name, kind,
//            shape}], "meta": {...}}
//   fp64     tensor values, concatenated in manifest order

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const QNetwork& model,
                     const nlohmann::json& meta = nlohmann::json::object());

struct LoadedCheckpoint {
  std::unique_ptr<QNetwork> model;
  nlohmann::json meta;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Loads values into an existing model; the stored config must describe the
// same architecture.
void load_checkpoint_into(const std::filesystem::path& path, QNetwork& model);

}  // namespace qforge
