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

// A hand-weighted dtqn_proj network that plays Catch perfectly.
//
// One frame, embed 4. The projection maps a preprocessed frame to
//   [d, -d, c, -c],  d proportional to ball column - paddle column, c = 0.25,
// using per-pixel weights of column/32 (ball rows) and -column/32 (paddle
// row) plus a bias that cancels the uniform background. With zero gate
// parameters the literal-gated layer returns LayerNorm(x + 1) = LayerNorm(x),
// pooling over one token is the identity, and the output layer reads
// Q = (-f0, f2, f0): RIGHT when d > 0, LEFT when d < 0, STAY when d = 0.

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qforge/envs.hpp"
#include "qforge/models.hpp"

namespace qforge::testing {

inline ModelConfig perfect_catch_config() {
  ModelConfig c;
  c.variant = Variant::kDtqnProj;
  c.frames = 1;
  c.actions = 3;
  c.convs.clear();
  c.embed = 4;
  c.heads = 2;
  c.depth = 1;
  c.gate_mode = nn::GateMode::kLiteral;
  return c;
}

inline std::unique_ptr<QNetwork> perfect_catch_model() {
  auto net = make_model(perfect_catch_config());
  for (auto t : net->parameters()) {
    auto v = t.tensor.mutable_values();
    std::fill(v.begin(), v.end(), 0.0);
  }
  auto tensor = [&](const std::string& name) {
    for (auto t : net->state())
      if (t.name == name) return t.tensor;
    throw std::logic_error("perfect_catch_model: no tensor " + name);
  };

  const std::size_t side = kFrameSide, paddle_top = side - 4;
  auto w = tensor("proj.weight").mutable_values();  // [side*side, 4]
  auto b = tensor("proj.bias").mutable_values();
  const double background = preprocess_frame(CatchEnv().reset_to(0)).at({40, 40});
  double all = 0.0;
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      const double col = static_cast<double>(x / 4) / 32.0;
      const double wd = y < paddle_top ? col : -col;
      w[(y * side + x) * 4 + 0] = wd;
      w[(y * side + x) * 4 + 1] = -wd;
      all += wd;
    }
  b[0] = -background * all;
  b[1] = background * all;
  b[2] = 0.25;
  b[3] = -0.25;

  for (const char* name : {"encoder.layers.0.norm_out.gain", "encoder.layers.0.norm1.gain",
                           "encoder.layers.0.norm2.gain"}) {
    auto g = tensor(name).mutable_values();
    std::fill(g.begin(), g.end(), 1.0);
  }
  auto out = tensor("out.weight").mutable_values();  // [4, 3]
  out[0 * 3 + 0] = -1.0;
  out[0 * 3 + 2] = 1.0;
  out[2 * 3 + 1] = 1.0;
  return net;
}

}  // namespace qforge::testing
