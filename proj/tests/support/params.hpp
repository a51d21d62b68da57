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

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "qforge/nn/module.hpp"

namespace qforge::testing {

inline Tensor find_state(const nn::Module& m, const std::string& name) {
  for (const auto& t : m.state())
    if (t.name == name) return t.tensor;
  FAIL("no tensor named " << name);
  return {};
}

inline void fill_state(const nn::Module& m, const std::string& name, double value) {
  auto v = find_state(m, name).mutable_values();
  std::fill(v.begin(), v.end(), value);
}

inline void set_state(const nn::Module& m, const std::string& name,
                      const std::vector<double>& values) {
  auto v = find_state(m, name).mutable_values();
  REQUIRE(v.size() == values.size());
  std::copy(values.begin(), values.end(), v.begin());
}

inline std::vector<std::pair<std::string, Tensor>> leaves_of(const nn::Module& m) {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const auto& p : m.parameters()) out.emplace_back(p.name, p.tensor);
  return out;
}

}  // namespace qforge::testing
