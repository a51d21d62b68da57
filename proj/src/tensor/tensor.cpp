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

#include "qforge/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "ops_internal.hpp"

namespace qforge {

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  for (std::size_t d : dims_) {
    if (d == 0) throw DimensionError("zero extent in shape " + str());
  }
}

std::size_t Shape::numel() const { return span(0, dims_.size()); }

std::size_t Shape::span(std::size_t begin, std::size_t end) const {
  std::size_t n = 1;
  for (std::size_t i = begin; i < end && i < dims_.size(); ++i) n *= dims_[i];
  return n;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ", ";
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

std::span<double> Node::grad_buffer() {
  if (grad.empty()) grad.assign(values.size(), 0.0);
  return grad;
}

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool any_requires_grad(std::initializer_list<const Tensor*> inputs) {
  if (!g_grad_enabled) return false;
  for (const Tensor* t : inputs)
    if (t && t->defined() && t->requires_grad()) return true;
  return false;
}

Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   std::vector<Tensor> inputs, BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  bool record = false;
  if (g_grad_enabled) {
    for (const Tensor& t : inputs)
      if (t.defined() && t.requires_grad()) record = true;
  }
  if (record) {
    node->requires_grad = true;
    node->op = op;
    node->inputs.reserve(inputs.size());
    for (const Tensor& t : inputs) node->inputs.push_back(t.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

}  // namespace detail

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return full(shape, 0.0, requires_grad);
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  return from(shape, std::vector<double>(shape.numel(), value), requires_grad);
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.numel()) {
    throw DimensionError("shape " + shape.str() + " needs " + std::to_string(shape.numel()) +
                         " values, got " + std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(Shape{}, {value}, requires_grad);
}

namespace {
const detail::Node& checked(const std::shared_ptr<detail::Node>& node) {
  if (!node) throw std::logic_error("use of undefined tensor");
  return *node;
}
}  // namespace

const Shape& Tensor::shape() const { return checked(node_).shape; }

std::span<const double> Tensor::values() const { return checked(node_).values; }

std::span<double> Tensor::mutable_values() {
  checked(node_);
  return node_->values;
}

double Tensor::item() const {
  const auto& n = checked(node_);
  if (n.values.size() != 1)
    throw DimensionError("item() on tensor of shape " + n.shape.str());
  return n.values[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const auto& n = checked(node_);
  if (index.size() != n.shape.rank())
    throw DimensionError("index rank mismatch for shape " + n.shape.str());
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= n.shape[axis]) throw DimensionError("index out of range for shape " + n.shape.str());
    flat = flat * n.shape[axis] + i;
    ++axis;
  }
  return n.values[flat];
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  checked(node_);
  if (!node_->is_leaf()) throw std::logic_error("requires_grad can only be set on leaves");
  node_->requires_grad = flag;
  return *this;
}

bool Tensor::is_leaf() const { return checked(node_).is_leaf(); }

bool Tensor::has_grad() const { return !checked(node_).grad.empty(); }

std::span<const double> Tensor::grad() const { return checked(node_).grad; }

std::span<double> Tensor::mutable_grad() {
  checked(node_);
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  checked(node_);
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::clear_grad() {
  checked(node_);
  node_->grad.clear();
  node_->grad.shrink_to_fit();
}

void Tensor::retain_grad() {
  checked(node_);
  node_->retain = true;
}

void Tensor::backward() const {
  const auto& root = checked(node_);
  if (root.values.size() != 1)
    throw DimensionError("backward() needs a scalar loss, got shape " + root.shape.str());
  if (!root.requires_grad) throw std::logic_error("backward() on a tensor that does not require grad");

  // Iterative post-order DFS over non-leaf nodes that require grad.
  std::vector<detail::Node*> order;
  std::unordered_set<const detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && !child->is_leaf() && visited.insert(child).second)
        stack.emplace_back(child, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
    if (!node->is_leaf() && !node->retain) {
      node->grad.clear();
      node->grad.shrink_to_fit();
    }
  }
}

Tensor Tensor::detach() const {
  const auto& n = checked(node_);
  auto node = std::make_shared<detail::Node>();
  node->shape = n.shape;
  node->values = n.values;
  return Tensor(std::move(node));
}

const char* Tensor::op_name() const {
  const auto& n = checked(node_);
  return n.op ? n.op : "leaf";
}

bool grad_enabled() { return detail::g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(detail::g_grad_enabled) { detail::g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { detail::g_grad_enabled = previous_; }

}  // namespace qforge
