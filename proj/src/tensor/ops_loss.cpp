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

#include <cmath>

#include "ops_internal.hpp"
#include "qforge/kernels/kernels.hpp"
#include "qforge/ops.hpp"

namespace qforge {

using detail::input_grad;
using detail::input_values;
using detail::make_result;
using detail::Node;
using detail::require;

Tensor sum(const Tensor& x) {
  const double total = kernels::active().sum(x.numel(), x.values().data());
  return make_result(Shape{}, {total}, "sum", {x}, [](Node& self) {
    auto g = input_grad(self, 0);
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor gather_last(const Tensor& x, std::span<const std::int64_t> index) {
  const Shape& s = x.shape();
  require(s.rank() == 2 && s[0] == index.size(),
          "gather_last: " + std::to_string(index.size()) + " indices for " + s.str());
  const std::size_t rows = s[0], cols = s[1];
  std::vector<std::size_t> flat(rows);
  std::vector<double> out(rows);
  const auto in = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    require(index[r] >= 0 && static_cast<std::size_t>(index[r]) < cols,
            "gather_last: index " + std::to_string(index[r]) + " out of range for " + s.str());
    flat[r] = r * cols + static_cast<std::size_t>(index[r]);
    out[r] = in[flat[r]];
  }
  return make_result(Shape{rows}, std::move(out), "gather_last", {x},
                     [flat = std::move(flat)](Node& self) {
                       auto g = input_grad(self, 0);
                       if (g.empty()) return;
                       for (std::size_t r = 0; r < flat.size(); ++r) g[flat[r]] += self.grad[r];
                     });
}

namespace {

void check_loss_inputs(const Tensor& pred, const Tensor& target, const char* op) {
  require(pred.shape() == target.shape(), std::string(op) + ": shape mismatch " +
                                              pred.shape().str() + " vs " + target.shape().str());
  for (double v : pred.values())
    if (std::isnan(v)) throw NumericError(std::string(op) + ": NaN in predictions");
  for (double v : target.values())
    if (std::isnan(v)) throw NumericError(std::string(op) + ": NaN in targets");
}

}  // namespace

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  check_loss_inputs(pred, target, "mse_loss");
  const auto p = pred.values();
  const auto t = target.values();
  const double n = static_cast<double>(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += (p[i] - t[i]) * (p[i] - t[i]);
  return make_result(Shape{}, {total / n}, "mse_loss", {pred, target}, [n](Node& self) {
    auto gp = input_grad(self, 0);
    auto gt = input_grad(self, 1);
    const auto& p = input_values(self, 0);
    const auto& t = input_values(self, 1);
    const double k = 2.0 * self.grad[0] / n;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double e = p[i] - t[i];
      if (!gp.empty()) gp[i] += k * e;
      if (!gt.empty()) gt[i] -= k * e;
    }
  });
}

Tensor huber_loss(const Tensor& pred, const Tensor& target, double delta) {
  if (!(delta > 0.0)) throw ConfigError("huber_loss: delta must be positive");
  check_loss_inputs(pred, target, "huber_loss");
  const auto p = pred.values();
  const auto t = target.values();
  const double n = static_cast<double>(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = std::abs(p[i] - t[i]);
    total += a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
  }
  return make_result(Shape{}, {total / n}, "huber_loss", {pred, target}, [n, delta](Node& self) {
    auto gp = input_grad(self, 0);
    auto gt = input_grad(self, 1);
    const auto& p = input_values(self, 0);
    const auto& t = input_values(self, 1);
    const double k = self.grad[0] / n;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double e = p[i] - t[i];
      const double de = std::abs(e) <= delta ? e : (e > 0 ? delta : -delta);
      if (!gp.empty()) gp[i] += k * de;
      if (!gt.empty()) gt[i] -= k * de;
    }
  });
}

}  // namespace qforge
