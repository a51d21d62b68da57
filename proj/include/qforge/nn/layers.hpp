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

#include "qforge/nn/module.hpp"
#include "qforge/ops.hpp"

namespace qforge::nn {

class Linear : public Module {
 public:
  Linear(std::size_t in, std::size_t out, Rng& rng, bool bias = true);

  // [..., in] -> [..., out]
  Tensor forward(const Tensor& x) const;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  std::size_t in_, out_;
  Tensor weight_;  // [in, out]
  Tensor bias_;    // [out] or undefined
};

class Conv2d : public Module {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
         Rng& rng);

  Tensor forward(const Tensor& x) const;

  std::size_t out_channels() const { return out_; }
  std::size_t kernel() const { return kernel_; }
  std::size_t stride() const { return stride_; }
  std::size_t output_extent(std::size_t input) const { return (input - kernel_) / stride_ + 1; }

 private:
  std::size_t out_, kernel_, stride_;
  Tensor weight_;  // [out, in, k, k]
  Tensor bias_;    // [out]
};

class BatchNorm2d : public Module {
 public:
  explicit BatchNorm2d(std::size_t channels, double momentum = 0.1, double eps = 1e-5);

  // Uses batch statistics while training() and running statistics otherwise.
  Tensor forward(const Tensor& x);

 private:
  Tensor gamma_, beta_;
  BatchNormStats stats_;
};

class LayerNorm : public Module {
 public:
  explicit LayerNorm(std::size_t dim, double eps = 1e-5);

  Tensor forward(const Tensor& x) const;

 private:
  Tensor gain_, shift_;
  double eps_;
};

// Learnable table [1, max_len, dim] added to the first S positions.
class PositionalEmbedding : public Module {
 public:
  PositionalEmbedding(std::size_t max_len, std::size_t dim, Rng& rng);

  // [B, S, dim] with S <= max_len.
  Tensor forward(const Tensor& x) const;

  const Tensor& table() const { return table_; }

 private:
  std::size_t max_len_, dim_;
  Tensor table_;
};

}  // namespace qforge::nn
