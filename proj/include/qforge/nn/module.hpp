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

// Parameter containers. A Module owns named parameter and buffer tensors and
// may register child modules; names are joined with '.' when flattened.
// Modules are address-stable (non-copyable, non-movable) because parents keep
// raw pointers to their children.

#include <cstddef>
#include <string>
#include <vector>

#include "qforge/rng.hpp"
#include "qforge/tensor.hpp"

namespace qforge::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

class Module {
 public:
  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;
  virtual ~Module() = default;

  // Trainable leaves, in registration order (depth-first over children).
  std::vector<NamedTensor> parameters() const;
  // Non-trainable state such as batch-norm running statistics.
  std::vector<NamedTensor> buffers() const;
  // Parameters followed by buffers; the order used for checkpoints.
  std::vector<NamedTensor> state() const;

  std::size_t param_count() const;

  void set_training(bool training);
  bool training() const { return training_; }

  void zero_grad();

  // Copies every parameter and buffer value from a structurally identical
  // module. Throws DimensionError on any name or shape mismatch.
  void copy_state_from(const Module& other);

 protected:
  Tensor register_parameter(std::string name, Tensor t);
  Tensor register_buffer(std::string name, Tensor t);
  void register_module(std::string name, Module& child);

 private:
  void collect(const std::string& prefix, bool params, std::vector<NamedTensor>& out) const;

  std::vector<NamedTensor> params_;
  std::vector<NamedTensor> buffers_;
  std::vector<std::pair<std::string, Module*>> children_;
  bool training_ = true;
};

// U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
Tensor he_uniform(const Shape& shape, std::size_t fan_in, Rng& rng);

}  // namespace qforge::nn
