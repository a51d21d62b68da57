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

#include "qforge/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qforge/rng.hpp"

namespace qforge {

GradCheckResult grad_check(const std::vector<nn::NamedTensor>& params,
                           const std::function<Tensor()>& loss, double step,
                           std::size_t max_coords, std::uint64_t seed, double floor) {
  for (auto p : params) p.tensor.clear_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) {
    if (p.tensor.has_grad()) {
      const auto g = p.tensor.grad();
      analytic.emplace_back(g.begin(), g.end());
    } else {
      analytic.emplace_back(p.tensor.numel(), 0.0);
    }
  }

  GradCheckResult result;
  Rng rng(seed);
  NoGradGuard guard;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor tensor = params[t].tensor;
    const std::size_t n = tensor.numel();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), 0);
    if (max_coords > 0 && max_coords < n) {
      for (std::size_t i = 0; i < max_coords; ++i)
        std::swap(coords[i], coords[i + rng.uniform_int(n - i)]);
      coords.resize(max_coords);
    }
    for (std::size_t i : coords) {
      auto v = tensor.mutable_values();
      const double saved = v[i];
      v[i] = saved + step;
      const double up = loss().item();
      v[i] = saved - step;
      const double down = loss().item();
      v[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[t][i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++result.coordinates;
      if (result.worst.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = params[t].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  for (auto p : params) p.tensor.clear_grad();
  return result;
}

}  // namespace qforge
