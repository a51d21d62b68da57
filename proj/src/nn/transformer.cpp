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

#include "qforge/nn/transformer.hpp"

#include <cmath>

namespace qforge::nn {

namespace {

std::size_t checked_head_dim(std::size_t dim, std::size_t heads) {
  if (heads == 0 || dim % heads != 0)
    throw ConfigError("attention: dim " + std::to_string(dim) + " not divisible by heads " +
                      std::to_string(heads));
  return dim / heads;
}

// [B, S, h*dk] -> [B, h, S, dk]
Tensor split_heads(const Tensor& x, std::size_t heads, std::size_t head_dim) {
  const Shape& s = x.shape();
  return permute(reshape(x, Shape{s[0], s[1], heads, head_dim}), {0, 2, 1, 3});
}

}  // namespace

MultiHeadAttention::MultiHeadAttention(std::size_t dim, std::size_t heads, Rng& rng)
    : dim_(dim),
      heads_(heads),
      head_dim_(checked_head_dim(dim, heads)),
      query_(dim, dim, rng),
      key_(dim, dim, rng),
      value_(dim, dim, rng),
      out_(dim, dim, rng) {
  register_module("query", query_);
  register_module("key", key_);
  register_module("value", value_);
  register_module("out", out_);
}

Tensor MultiHeadAttention::forward(const Tensor& x, Tensor* weights) const {
  const Shape& s = x.shape();
  if (s.rank() != 3 || s[2] != dim_)
    throw DimensionError("attention: expected [B, S, " + std::to_string(dim_) + "], got " +
                         s.str());
  const Tensor q = split_heads(query_.forward(x), heads_, head_dim_);
  const Tensor k = split_heads(key_.forward(x), heads_, head_dim_);
  const Tensor v = split_heads(value_.forward(x), heads_, head_dim_);
  const Tensor scores = scale(bmm(q, transpose_last(k)), 1.0 / std::sqrt(double(head_dim_)));
  const Tensor probs = softmax(scores);
  if (weights != nullptr) *weights = probs;
  const Tensor ctx = permute(bmm(probs, v), {0, 2, 1, 3});
  return out_.forward(reshape(ctx, s));
}

GateMode parse_gate_mode(const std::string& text) {
  if (text == "literal") return GateMode::kLiteral;
  if (text == "multiplicative") return GateMode::kMultiplicative;
  throw ConfigError("gate_mode must be literal or multiplicative, got '" + text + "'");
}

const char* gate_mode_name(GateMode mode) {
  return mode == GateMode::kLiteral ? "literal" : "multiplicative";
}

namespace {

GatedLayerConfig resolved(GatedLayerConfig c) {
  if (c.ff_dim == 0) c.ff_dim = 4 * c.dim;
  return c;
}

}  // namespace

GatedTXLLayer::GatedTXLLayer(const GatedLayerConfig& config, Rng& rng, std::uint64_t dropout_seed)
    : config_(resolved(config)),
      norm1_(config_.dim),
      attention_(config_.dim, config_.heads, rng),
      gate1_(2 * config_.dim, config_.dim, rng),
      norm2_(config_.dim),
      ff1_(config_.dim, config_.ff_dim, rng),
      ff2_(config_.ff_dim, config_.dim, rng),
      gate2_(2 * config_.dim, config_.dim, rng),
      norm_out_(config_.dim),
      dropout_rng_(dropout_seed) {
  register_module("norm1", norm1_);
  register_module("attention", attention_);
  register_module("gate1", gate1_);
  register_module("norm2", norm2_);
  register_module("ff1", ff1_);
  register_module("ff2", ff2_);
  register_module("gate2", gate2_);
  register_module("norm_out", norm_out_);
}

Tensor GatedTXLLayer::forward(const Tensor& x, GatedLayerTrace* trace) {
  const bool literal = config_.gate_mode == GateMode::kLiteral;
  const double rate = config_.dropout;
  const bool train = training();

  const Tensor attn = attention_.forward(norm1_.forward(x));
  const Tensor g1 = sigmoid(gate1_.forward(concat_last(x, attn)));
  const Tensor y = add(x, dropout(literal ? g1 : mul(g1, attn), rate, train, dropout_rng_));

  const Tensor ff = ff2_.forward(relu(ff1_.forward(norm2_.forward(y))));
  const Tensor g2 = sigmoid(gate2_.forward(concat_last(y, ff)));
  const Tensor z = add(y, dropout(literal ? g2 : mul(g2, ff), rate, train, dropout_rng_));

  if (trace != nullptr) *trace = {attn, g1, y, ff, g2, z};
  return norm_out_.forward(z);
}

GatedEncoder::GatedEncoder(const GatedLayerConfig& config, std::size_t depth, Rng& rng) {
  if (depth == 0) throw ConfigError("GatedEncoder: depth must be at least 1");
  for (std::size_t i = 0; i < depth; ++i) {
    layers_.push_back(std::make_unique<GatedTXLLayer>(config, rng, rng.next_u64()));
    register_module("layers." + std::to_string(i), *layers_.back());
  }
}

Tensor GatedEncoder::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer->forward(h);
  return h;
}

AttentionPooling::AttentionPooling(std::size_t dim, Rng& rng) : score_(dim, 1, rng) {
  register_module("score", score_);
}

Tensor AttentionPooling::forward(const Tensor& x, Tensor* weights) const {
  const Shape& s = x.shape();
  if (s.rank() != 3) throw DimensionError("AttentionPooling: expected [B, S, E], got " + s.str());
  const Tensor w = softmax(reshape(score_.forward(x), Shape{s[0], s[1]}));
  if (weights != nullptr) *weights = w;
  return reshape(bmm(reshape(w, Shape{s[0], 1, s[1]}), x), Shape{s[0], s[2]});
}

}  // namespace qforge::nn
