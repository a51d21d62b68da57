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

#include "qforge/nn/layers.hpp"

namespace qforge::nn {

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, bool bias) : in_(in), out_(out) {
  weight_ = register_parameter("weight", he_uniform(Shape{in, out}, in, rng));
  if (bias) bias_ = register_parameter("bias", Tensor::zeros(Shape{out}));
}

Tensor Linear::forward(const Tensor& x) const { return linear(x, weight_, bias_); }

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
               std::size_t stride, Rng& rng)
    : out_(out_channels), kernel_(kernel), stride_(stride) {
  if (kernel == 0 || stride == 0) throw ConfigError("Conv2d: kernel and stride must be positive");
  weight_ = register_parameter(
      "weight", he_uniform(Shape{out_channels, in_channels, kernel, kernel},
                           in_channels * kernel * kernel, rng));
  bias_ = register_parameter("bias", Tensor::zeros(Shape{out_channels}));
}

Tensor Conv2d::forward(const Tensor& x) const { return conv2d(x, weight_, bias_, stride_); }

BatchNorm2d::BatchNorm2d(std::size_t channels, double momentum, double eps) {
  gamma_ = register_parameter("gamma", Tensor::full(Shape{channels}, 1.0));
  beta_ = register_parameter("beta", Tensor::zeros(Shape{channels}));
  stats_.running_mean = register_buffer("running_mean", Tensor::zeros(Shape{channels}));
  stats_.running_var = register_buffer("running_var", Tensor::full(Shape{channels}, 1.0));
  stats_.momentum = momentum;
  stats_.eps = eps;
}

Tensor BatchNorm2d::forward(const Tensor& x) {
  return batch_norm(x, gamma_, beta_, stats_, training());
}

LayerNorm::LayerNorm(std::size_t dim, double eps) : eps_(eps) {
  gain_ = register_parameter("gain", Tensor::full(Shape{dim}, 1.0));
  shift_ = register_parameter("shift", Tensor::zeros(Shape{dim}));
}

Tensor LayerNorm::forward(const Tensor& x) const { return layer_norm(x, gain_, shift_, eps_); }

PositionalEmbedding::PositionalEmbedding(std::size_t max_len, std::size_t dim, Rng& rng)
    : max_len_(max_len), dim_(dim) {
  std::vector<double> v(max_len * dim);
  for (double& x : v) x = rng.uniform(-0.02, 0.02);
  table_ = register_parameter("table", Tensor::from(Shape{1, max_len, dim}, std::move(v)));
}

Tensor PositionalEmbedding::forward(const Tensor& x) const {
  const Shape& s = x.shape();
  if (s.rank() != 3 || s[2] != dim_ || s[1] > max_len_)
    throw DimensionError("PositionalEmbedding: input " + s.str() + " does not fit table " +
                         table_.shape().str());
  const Tensor rows = s[1] == max_len_ ? table_ : narrow(table_, 1, 0, s[1]);
  return add(x, rows);
}

}  // namespace qforge::nn
