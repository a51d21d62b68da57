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

#include "qforge/nn/module.hpp"

#include <algorithm>
#include <cmath>

namespace qforge::nn {

Tensor Module::register_parameter(std::string name, Tensor t) {
  t.set_requires_grad(true);
  params_.push_back({std::move(name), t});
  return t;
}

Tensor Module::register_buffer(std::string name, Tensor t) {
  buffers_.push_back({std::move(name), t});
  return t;
}

void Module::register_module(std::string name, Module& child) {
  children_.emplace_back(std::move(name), &child);
}

void Module::collect(const std::string& prefix, bool params,
                     std::vector<NamedTensor>& out) const {
  for (const auto& [name, t] : params ? params_ : buffers_) out.push_back({prefix + name, t});
  for (const auto& [name, child] : children_) child->collect(prefix + name + ".", params, out);
}

std::vector<NamedTensor> Module::parameters() const {
  std::vector<NamedTensor> out;
  collect("", true, out);
  return out;
}

std::vector<NamedTensor> Module::buffers() const {
  std::vector<NamedTensor> out;
  collect("", false, out);
  return out;
}

std::vector<NamedTensor> Module::state() const {
  auto out = parameters();
  auto extra = buffers();
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

std::size_t Module::param_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor.numel();
  return n;
}

void Module::set_training(bool training) {
  training_ = training;
  for (auto& [name, child] : children_) child->set_training(training);
}

void Module::zero_grad() {
  for (auto& p : parameters()) p.tensor.clear_grad();
}

void Module::copy_state_from(const Module& other) {
  const auto dst = state();
  const auto src = other.state();
  if (dst.size() != src.size())
    throw DimensionError("copy_state_from: " + std::to_string(src.size()) + " tensors into " +
                         std::to_string(dst.size()));
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].name != src[i].name || dst[i].tensor.shape() != src[i].tensor.shape())
      throw DimensionError("copy_state_from: " + src[i].name + " " + src[i].tensor.shape().str() +
                           " does not match " + dst[i].name + " " + dst[i].tensor.shape().str());
    auto to = Tensor(dst[i].tensor).mutable_values();
    const auto from = src[i].tensor.values();
    std::copy(from.begin(), from.end(), to.begin());
  }
}

Tensor he_uniform(const Shape& shape, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<double> v(shape.numel());
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from(shape, std::move(v));
}

}  // namespace qforge::nn
