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

#include <memory>

#include "qforge/models.hpp"

namespace qforge {

Tensor QNetwork::as_frames(const Tensor& input) const {
  const auto& c = config_;
  const Shape frames{input.shape().rank() > 0 ? input.dim(0) : 1, c.frames, c.height, c.width};
  const Shape& s = input.shape();
  const bool ok =
      (s.rank() == 4 && s == frames) ||
      (c.variant == Variant::kDtqnVit && s.rank() == 2 && s[1] == frames.span(1, 4)) ||
      (c.variant == Variant::kDtqnProj && s.rank() == 3 && s[1] == c.frames &&
       s[2] == c.height * c.width);
  if (!ok)
    throw DimensionError(std::string(variant_name(c.variant)) + ": input " + s.str() +
                         " does not match " + frames.str());
  return s.rank() == 4 ? input : reshape(input, frames);
}

namespace {

class ConvStack : public nn::Module {
 public:
  ConvStack(const ModelConfig& c, bool batch_norm, Rng& rng) : order_(c.norm_order) {
    std::size_t in = c.frames;
    for (std::size_t i = 0; i < c.convs.size(); ++i) {
      const auto& s = c.convs[i];
      convs_.push_back(std::make_unique<nn::Conv2d>(in, s.channels, s.kernel, s.stride, rng));
      register_module("conv" + std::to_string(i + 1), *convs_.back());
      if (batch_norm) {
        norms_.push_back(std::make_unique<nn::BatchNorm2d>(s.channels));
        register_module("bn" + std::to_string(i + 1), *norms_.back());
      }
      in = s.channels;
    }
  }

  Tensor forward(const Tensor& x) {
    Tensor h = x;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      h = convs_[i]->forward(h);
      if (norms_.empty()) {
        h = relu(h);
      } else if (order_ == NormOrder::kBnRelu) {
        h = relu(norms_[i]->forward(h));
      } else {
        h = norms_[i]->forward(relu(h));
      }
    }
    return h;
  }

 private:
  NormOrder order_;
  std::vector<std::unique_ptr<nn::Conv2d>> convs_;
  std::vector<std::unique_ptr<nn::BatchNorm2d>> norms_;
};

// Hidden ReLU layers followed by a linear output layer.
class MlpHead : public nn::Module {
 public:
  MlpHead(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng) {
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      layers_.push_back(std::make_unique<nn::Linear>(in, hidden[i], rng));
      register_module("fc" + std::to_string(i + 1), *layers_.back());
      in = hidden[i];
    }
    layers_.push_back(std::make_unique<nn::Linear>(in, out, rng));
    register_module("out", *layers_.back());
  }

  Tensor forward(const Tensor& x) const {
    Tensor h = x;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = relu(layers_[i]->forward(h));
    return layers_.back()->forward(h);
  }

 private:
  std::vector<std::unique_ptr<nn::Linear>> layers_;
};

nn::GatedLayerConfig encoder_config(const ModelConfig& c) {
  return {c.embed, c.heads, c.ff_dim, c.dropout, c.gate_mode};
}

class Dcqn : public QNetwork {
 public:
  explicit Dcqn(const ModelConfig& config)
      : QNetwork(config),
        rng_(config_.seed),
        convs_(config_, true, rng_),
        head_(flat_size(), config_.fc, config_.actions, rng_) {
    register_module("features", convs_);
    register_module("head", head_);
  }

  Tensor forward(const Tensor& input) override {
    return head_.forward(flatten_from(convs_.forward(as_frames(input)), 1));
  }

 private:
  std::size_t flat_size() const {
    return config_.convs.back().channels * conv_chain_extent(config_.height, config_.convs) *
           conv_chain_extent(config_.width, config_.convs);
  }

  Rng rng_;
  ConvStack convs_;
  MlpHead head_;
};

class DtqnVit : public QNetwork {
 public:
  explicit DtqnVit(const ModelConfig& config)
      : QNetwork(config),
        rng_(config_.seed),
        proj_(config_.patch * config_.patch, config_.embed, rng_),
        pos_(sequence_length(config_), config_.embed, rng_),
        encoder_(encoder_config(config_), config_.depth, rng_),
        head_(sequence_length(config_) * config_.embed, config_.fc, config_.actions, rng_) {
    register_module("patch_proj", proj_);
    register_module("pos", pos_);
    register_module("encoder", encoder_);
    register_module("head", head_);
  }

  Tensor forward(const Tensor& input) override {
    const Tensor patches = unfold_patches(as_frames(input), config_.patch);
    const Tensor tokens = pos_.forward(proj_.forward(patches));
    return head_.forward(flatten_from(encoder_.forward(tokens), 1));
  }

 private:
  Rng rng_;
  nn::Linear proj_;
  nn::PositionalEmbedding pos_;
  nn::GatedEncoder encoder_;
  MlpHead head_;
};

class DtqnProj : public QNetwork {
 public:
  explicit DtqnProj(const ModelConfig& config)
      : QNetwork(config),
        rng_(config_.seed),
        proj_(config_.height * config_.width, config_.embed, rng_),
        pos_(config_.frames, config_.embed, rng_),
        encoder_(encoder_config(config_), config_.depth, rng_),
        pool_(config_.embed, rng_),
        out_(config_.embed, config_.actions, rng_) {
    register_module("proj", proj_);
    register_module("pos", pos_);
    register_module("encoder", encoder_);
    register_module("pool", pool_);
    register_module("out", out_);
  }

  Tensor forward(const Tensor& input) override {
    const Tensor frames = as_frames(input);
    const Shape& s = frames.shape();
    const Tensor tokens = proj_.forward(reshape(frames, Shape{s[0], s[1], s[2] * s[3]}));
    return out_.forward(pool_.forward(encoder_.forward(pos_.forward(tokens))));
  }

 private:
  Rng rng_;
  nn::Linear proj_;
  nn::PositionalEmbedding pos_;
  nn::GatedEncoder encoder_;
  nn::AttentionPooling pool_;
  nn::Linear out_;
};

class ConvTransformer : public QNetwork {
 public:
  explicit ConvTransformer(const ModelConfig& config)
      : QNetwork(config),
        rng_(config_.seed),
        convs_(config_, false, rng_),
        proj_(config_.convs.back().channels, config_.embed, rng_),
        pos_(sequence_length(config_), config_.embed, rng_),
        encoder_(encoder_config(config_), config_.depth, rng_),
        out_(sequence_length(config_) * config_.embed, config_.actions, rng_) {
    register_module("features", convs_);
    register_module("token_proj", proj_);
    register_module("pos", pos_);
    register_module("encoder", encoder_);
    register_module("out", out_);
  }

  Tensor forward(const Tensor& input) override {
    const Tensor f = convs_.forward(as_frames(input));  // [B, C, H', W']
    const Shape& s = f.shape();
    const Tensor tokens = transpose_last(reshape(f, Shape{s[0], s[1], s[2] * s[3]}));
    const Tensor enc = encoder_.forward(pos_.forward(proj_.forward(tokens)));
    return out_.forward(flatten_from(enc, 1));
  }

 private:
  Rng rng_;
  ConvStack convs_;
  nn::Linear proj_;
  nn::PositionalEmbedding pos_;
  nn::GatedEncoder encoder_;
  nn::Linear out_;
};

}  // namespace

std::unique_ptr<QNetwork> make_model(const ModelConfig& config) {
  switch (config.variant) {
    case Variant::kDcqn:
      return std::make_unique<Dcqn>(config);
    case Variant::kDtqnVit:
      return std::make_unique<DtqnVit>(config);
    case Variant::kDtqnProj:
      return std::make_unique<DtqnProj>(config);
    case Variant::kConvTransformer:
      return std::make_unique<ConvTransformer>(config);
  }
  throw ConfigError("model.variant: unsupported");
}

}  // namespace qforge
