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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qforge/tensor.hpp"

namespace qforge::detail {

using BackwardFn = std::function<void(Node&)>;

bool any_requires_grad(std::initializer_list<const Tensor*> inputs);

// Wraps freshly computed values. Records `backward` and the inputs only when
// grad mode is on and some input requires grad.
Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   std::vector<Tensor> inputs, BackwardFn backward);

// Gradient buffer of input `i` of `out`, or an empty span if that input does
// not take gradients.
inline std::span<double> input_grad(Node& out, std::size_t i) {
  Node& in = *out.inputs[i];
  if (!in.requires_grad) return {};
  return in.grad_buffer();
}

inline const std::vector<double>& input_values(const Node& out, std::size_t i) {
  return out.inputs[i]->values;
}

inline void require(bool cond, const std::string& message) {
  if (!cond) throw DimensionError(message);
}

}  // namespace qforge::detail
