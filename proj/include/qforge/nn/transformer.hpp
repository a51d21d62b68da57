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

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "qforge/nn/layers.hpp"

namespace qforge::nn {

class MultiHeadAttention : public Module {
 public:
  MultiHeadAttention(std::size_t dim, std::size_t heads, Rng& rng);

  // [B, S, dim] -> [B, S, dim]. If weights is non-null it receives the
  // attention probabilities [B, heads, S, S].
  Tensor forward(const Tensor& x, Tensor* weights = nullptr) const;

  std::size_t heads() const { return heads_; }

 private:
  std::size_t dim_, heads_, head_dim_;
  Linear query_, key_, value_, out_;
};

enum class GateMode { kLiteral, kMultiplicative };

GateMode parse_gate_mode(const std::string& text);
const char* gate_mode_name(GateMode mode);

struct GatedLayerConfig {
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t ff_dim = 0;  // 0 means 4 * dim
  double dropout = 0.0;
  GateMode gate_mode = GateMode::kLiteral;
};

// Intermediate values of one gated layer forward pass.
struct GatedLayerTrace {
  Tensor attention;  // Attn(Q, K, V) on the normalized input
  Tensor gate1;
  Tensor y;
  Tensor feed_forward;
  Tensor gate2;
  Tensor z;
};

// Pre-norm gated transformer layer:
//   A  = Attn(LN1(X));        G1 = sigmoid(Wg [X, A] + bg)
//   Y  = X + Dropout(G1)           (literal)
//   Y  = X + Dropout(G1 * A)       (multiplicative)
//   F  = FF(LN2(Y));          G2 = sigmoid(Wg' [Y, F] + bg')
//   Z  = Y + Dropout(G2)  or  Y + Dropout(G2 * F)
//   out = LN(Z)
class GatedTXLLayer : public Module {
 public:
  GatedTXLLayer(const GatedLayerConfig& config, Rng& rng, std::uint64_t dropout_seed = 0);

  Tensor forward(const Tensor& x, GatedLayerTrace* trace = nullptr);

  const GatedLayerConfig& config() const { return config_; }
  Linear& gate1() { return gate1_; }
  Linear& gate2() { return gate2_; }

 private:
  GatedLayerConfig config_;
  LayerNorm norm1_;
  MultiHeadAttention attention_;
  Linear gate1_;
  LayerNorm norm2_;
  Linear ff1_, ff2_;
  Linear gate2_;
  LayerNorm norm_out_;
  Rng dropout_rng_;
};

class GatedEncoder : public Module {
 public:
  GatedEncoder(const GatedLayerConfig& config, std::size_t depth, Rng& rng);

  Tensor forward(const Tensor& x);

  std::size_t depth() const { return layers_.size(); }
  GatedTXLLayer& layer(std::size_t i) { return *layers_.at(i); }

 private:
  std::vector<std::unique_ptr<GatedTXLLayer>> layers_;
};

// Scores each position with a learned linear map, softmaxes over the
// sequence and returns the weighted sum: [B, S, E] -> [B, E].
class AttentionPooling : public Module {
 public:
  AttentionPooling(std::size_t dim, Rng& rng);

  // If weights is non-null it receives the pooling weights [B, S].
  Tensor forward(const Tensor& x, Tensor* weights = nullptr) const;

  Linear& score() { return score_; }

 private:
  Linear score_;
};

}  // namespace qforge::nn
