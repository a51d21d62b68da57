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

// Central finite-difference check of reverse-mode gradients.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qforge/nn/module.hpp"

namespace qforge {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<tensor>[<flat index>]"
  std::size_t coordinates = 0;
};

// Compares d loss / d theta from backward() with (L(theta + h) - L(theta - h)) / 2h
// for every coordinate, or for max_coords seeded random coordinates per
// tensor when max_coords > 0. The relative error of one coordinate is
// |a - n| / max(|a|, |n|, floor).
GradCheckResult grad_check(const std::vector<nn::NamedTensor>& params,
                           const std::function<Tensor()>& loss, double step = 1e-5,
                           std::size_t max_coords = 0, std::uint64_t seed = 0,
                           double floor = 1e-6);

}  // namespace qforge
