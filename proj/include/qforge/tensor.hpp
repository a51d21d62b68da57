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

// Dense fp64 tensors with reverse-mode differentiation.
//
// A Tensor is a shared handle: copying a Tensor aliases the same storage and
// graph node. Ops that see at least one input with requires_grad() (and grad
// mode enabled) record a backward closure; backward() on a scalar walks the
// recorded graph in reverse topological order and accumulates gradients into
// leaves. Intermediate gradients are dropped after use unless retain_grad()
// was called on that tensor.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qforge {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
  std::size_t numel() const;
  std::size_t back() const { return dims_.back(); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  // Product of extents in [begin, end).
  std::size_t span(std::size_t begin, std::size_t end) const;

  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until written
  bool requires_grad = false;
  bool retain = false;
  const char* op = nullptr;  // nullptr for leaves
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return op == nullptr; }
  std::span<double> grad_buffer();  // allocates zero-filled on first use
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double value, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const { return shape().numel(); }
  std::size_t dim(std::size_t axis) const { return shape()[axis]; }

  std::span<const double> values() const;
  // Mutable access to storage. Writing to a tensor that participates in a
  // recorded graph invalidates that graph's gradients.
  std::span<double> mutable_values();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  bool is_leaf() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();
  void clear_grad();
  void retain_grad();

  // Requires a single-element tensor. Seeds d(self)/d(self) = 1.
  void backward() const;

  // Copy of the values as a new leaf with no graph edge.
  Tensor detach() const;

  const char* op_name() const;
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  // Internal constructor used by ops.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Grad mode is thread-local. While disabled, ops never record graph edges.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace qforge
