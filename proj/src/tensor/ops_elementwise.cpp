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

#include <algorithm>
#include <cmath>
#include <limits>

#include "ops_internal.hpp"
#include "qforge/kernels/kernels.hpp"
#include "qforge/ops.hpp"

namespace qforge {

using detail::input_grad;
using detail::input_values;
using detail::make_result;
using detail::Node;
using detail::require;

namespace {

// Number of trailing elements b covers when broadcast against a, or 0 if b is
// not a (unit-padded) suffix of a.
std::size_t broadcast_inner(const Shape& a, const Shape& b) {
  std::size_t lead = 0;
  while (lead + 1 < b.rank() && b[lead] == 1) ++lead;
  const std::size_t brank = b.rank() - lead;
  if (brank > a.rank()) return 0;
  for (std::size_t i = 0; i < brank; ++i) {
    if (b[lead + i] != a[a.rank() - brank + i]) return 0;
  }
  return b.numel();
}

constexpr double kSigmoidFloor = std::numeric_limits<double>::min();
constexpr double kSigmoidCeil = 1.0 - std::numeric_limits<double>::epsilon() / 2;

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + a.shape().str() +
                                      " vs " + b.shape().str());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const std::size_t inner = broadcast_inner(a.shape(), b.shape());
  require(inner != 0, "add: cannot broadcast " + b.shape().str() + " onto " + a.shape().str());
  const std::size_t outer = a.numel() / inner;
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> out(va.begin(), va.end());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += vb[i];
  return make_result(a.shape(), std::move(out), "add", {a, b}, [outer, inner](Node& self) {
    auto ga = input_grad(self, 0);
    auto gb = input_grad(self, 1);
    if (!ga.empty())
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
    if (!gb.empty()) {
      const auto& k = kernels::active();
      for (std::size_t o = 0; o < outer; ++o)
        k.axpy(inner, 1.0, self.grad.data() + o * inner, gb.data());
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  return make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
    auto ga = input_grad(self, 0);
    auto gb = input_grad(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (!ga.empty()) ga[i] += self.grad[i];
      if (!gb.empty()) gb[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  return make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
    auto ga = input_grad(self, 0);
    auto gb = input_grad(self, 1);
    const auto& va = input_values(self, 0);
    const auto& vb = input_values(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (!ga.empty()) ga[i] += self.grad[i] * vb[i];
      if (!gb.empty()) gb[i] += self.grad[i] * va[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  const auto vx = x.values();
  std::vector<double> out(vx.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vx[i] * factor;
  return make_result(x.shape(), std::move(out), "scale", {x}, [factor](Node& self) {
    auto g = input_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor add_scalar(const Tensor& x, double value) {
  const auto vx = x.values();
  std::vector<double> out(vx.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vx[i] + value;
  return make_result(x.shape(), std::move(out), "add_scalar", {x}, [](Node& self) {
    auto g = input_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor relu(const Tensor& x) {
  const auto vx = x.values();
  std::vector<double> out(vx.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vx[i] > 0.0 ? vx[i] : 0.0;
  return make_result(x.shape(), std::move(out), "relu", {x}, [](Node& self) {
    auto g = input_grad(self, 0);
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (self.values[i] > 0.0) g[i] += self.grad[i];
  });
}

Tensor sigmoid(const Tensor& x) {
  const auto vx = x.values();
  std::vector<double> out(vx.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Branch on sign so exp never overflows.
    const double v = vx[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
    // Saturated inputs would round to exactly 0 or 1; gates rely on the open interval.
    out[i] = std::clamp(out[i], kSigmoidFloor, kSigmoidCeil);
  }
  return make_result(x.shape(), std::move(out), "sigmoid", {x}, [](Node& self) {
    auto g = input_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = self.values[i];
      g[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

}  // namespace qforge
