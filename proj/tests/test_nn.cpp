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

#include "doctest.h"
#include "qforge/nn/transformer.hpp"
#include "support/finite_diff.hpp"
#include "support/params.hpp"

namespace qforge {
namespace {

using testing::check_gradients;
using testing::fill_state;
using testing::find_state;
using testing::leaves_of;
using testing::random_tensor;
using testing::set_state;

Tensor probe(const Tensor& y, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul(y, random_tensor(y.shape(), rng, -1, 1, false)));
}

// Plain-loop layer norm over the last axis of a row-major buffer.
std::vector<double> ref_layer_norm(const std::vector<double>& x, std::size_t d,
                                   const std::vector<double>& gain,
                                   const std::vector<double>& shift, double eps = 1e-5) {
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < x.size() / d; ++r) {
    double m = 0.0;
    for (std::size_t j = 0; j < d; ++j) m += x[r * d + j];
    m /= double(d);
    double v = 0.0;
    for (std::size_t j = 0; j < d; ++j) v += (x[r * d + j] - m) * (x[r * d + j] - m);
    v /= double(d);
    for (std::size_t j = 0; j < d; ++j)
      out[r * d + j] = (x[r * d + j] - m) / std::sqrt(v + eps) * gain[j] + shift[j];
  }
  return out;
}

std::vector<double> to_vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

TEST_CASE("linear layer examples") {
  Rng rng(1);
  nn::Linear id(3, 3, rng);
  set_state(id, "weight", {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto x = random_tensor(Shape{2, 3}, rng, -1, 1, false);
  const auto y = id.forward(x);
  for (std::size_t i = 0; i < 6; ++i) CHECK(y.values()[i] == x.values()[i]);

  nn::Linear two(2, 1, rng);
  set_state(two, "weight", {1, 1});
  set_state(two, "bias", {1});
  CHECK(two.forward(Tensor::from(Shape{1, 2}, {2, 3})).item() == 6.0);

  CHECK(nn::Linear(10, 5, rng).param_count() == 55);
  CHECK(nn::Linear(10, 5, rng, false).param_count() == 50);
  CHECK_THROWS_AS(two.forward(Tensor::zeros(Shape{1, 3})), DimensionError);
}

TEST_CASE("he_uniform stays within its bound") {
  Rng rng(2);
  const auto w = nn::he_uniform(Shape{50, 40}, 24, rng);
  const double bound = std::sqrt(6.0 / 24.0);
  double lo = 1, hi = -1;
  for (double v : w.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= -bound);
  CHECK(hi <= bound);
  CHECK(hi - lo > 1.8 * bound);
}

TEST_CASE("module registry") {
  Rng rng(3);
  nn::GatedTXLLayer layer({8, 2, 16, 0.0, nn::GateMode::kLiteral}, rng);
  const auto params = layer.parameters();
  CHECK(params.front().name == "norm1.gain");
  CHECK(find_state(layer, "attention.query.weight").shape() == Shape{8, 8});
  CHECK(find_state(layer, "gate1.weight").shape() == Shape{16, 8});
  CHECK(find_state(layer, "ff1.weight").shape() == Shape{8, 16});
  // ln (2*8)*3 + attn 4*(64+8) + gates 2*(128+8) + ff (128+16)+(128+8)
  CHECK(layer.param_count() == 48 + 288 + 272 + 280);

  nn::BatchNorm2d bn(3);
  CHECK(bn.param_count() == 6);
  CHECK(bn.buffers().size() == 2);
  CHECK(bn.state().size() == 4);

  nn::GatedTXLLayer other({8, 2, 16, 0.0, nn::GateMode::kLiteral}, rng);
  other.copy_state_from(layer);
  const auto a = layer.state();
  const auto b = other.state();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].tensor.numel(); ++j)
      CHECK(a[i].tensor.values()[j] == b[i].tensor.values()[j]);
  nn::GatedTXLLayer wider({16, 2, 16, 0.0, nn::GateMode::kLiteral}, rng);
  CHECK_THROWS_AS(wider.copy_state_from(layer), DimensionError);
}

TEST_CASE("multi-head attention with constant keys averages the values") {
  Rng rng(4);
  const std::size_t d = 6, s = 5;
  nn::MultiHeadAttention mha(d, 3, rng);
  fill_state(mha, "key.weight", 0.0);
  fill_state(mha, "key.bias", 0.0);
  set_state(mha, "value.bias", to_vec(random_tensor(Shape{d}, rng, -1, 1, false)));
  set_state(mha, "out.bias", to_vec(random_tensor(Shape{d}, rng, -1, 1, false)));
  const auto x = random_tensor(Shape{2, s, d}, rng, -1, 1, false);
  Tensor weights;
  const auto y = mha.forward(x, &weights);
  CHECK(y.shape() == Shape{2, s, d});
  for (double w : weights.values()) CHECK(std::abs(w - 1.0 / s) < 1e-15);

  const auto wv = to_vec(find_state(mha, "value.weight"));
  const auto bv = to_vec(find_state(mha, "value.bias"));
  const auto wo = to_vec(find_state(mha, "out.weight"));
  const auto bo = to_vec(find_state(mha, "out.bias"));
  for (std::size_t b = 0; b < 2; ++b) {
    std::vector<double> mean_v(d, 0.0);
    for (std::size_t t = 0; t < s; ++t)
      for (std::size_t j = 0; j < d; ++j) {
        double v = bv[j];
        for (std::size_t i = 0; i < d; ++i) v += x.at({b, t, i}) * wv[i * d + j];
        mean_v[j] += v / s;
      }
    for (std::size_t j = 0; j < d; ++j) {
      double expect = bo[j];
      for (std::size_t i = 0; i < d; ++i) expect += mean_v[i] * wo[i * d + j];
      for (std::size_t t = 0; t < s; ++t) CHECK(std::abs(y.at({b, t, j}) - expect) < 1e-12);
    }
  }
}

TEST_CASE("multi-head attention with a dominant key returns that value") {
  Rng rng(5);
  nn::MultiHeadAttention mha(2, 1, rng);
  for (const char* name : {"query.weight", "key.weight", "value.weight", "out.weight"})
    set_state(mha, name, {1, 0, 0, 1});
  // Scores for every query row x_i are x_i0 * x_j0 / sqrt(2); rows with
  // x_i0 = 1 see a logit gap of exactly 50 toward position 2.
  const double c = 1.0 + 50.0 * std::sqrt(2.0);
  const auto x = Tensor::from(Shape{1, 3, 2}, {1.0, 0.3, 1.0, -0.7, c, 2.0});
  Tensor weights;
  const auto y = mha.forward(x, &weights);
  CHECK(std::abs(weights.at({0, 0, 0, 2}) - 1.0) < 1e-20 + 2.0 * std::exp(-50.0));
  for (std::size_t row : {0, 1}) {
    CHECK(std::abs(y.at({0, row, 0}) - c) < 1e-12 * c);
    CHECK(std::abs(y.at({0, row, 1}) - 2.0) < 1e-12);
  }
}

TEST_CASE("attention shape preservation and config errors") {
  Rng rng(6);
  nn::MultiHeadAttention mha(128, 4, rng);
  CHECK(mha.forward(Tensor::zeros(Shape{2, 100, 128})).shape() == Shape{2, 100, 128});
  CHECK_THROWS_AS(nn::MultiHeadAttention(10, 4, rng), ConfigError);
  CHECK_THROWS_AS(nn::MultiHeadAttention(10, 0, rng), ConfigError);
}

TEST_CASE("gated layer with zero gates adds one half per sub-layer") {
  Rng rng(7);
  const std::size_t d = 8;
  nn::GatedTXLLayer layer({d, 2, 16, 0.0, nn::GateMode::kLiteral}, rng);
  for (const char* name : {"gate1.weight", "gate1.bias", "gate2.weight", "gate2.bias"})
    fill_state(layer, name, 0.0);
  const auto x = random_tensor(Shape{2, 3, d}, rng, -2, 2, false);
  nn::GatedLayerTrace trace;
  const auto out = layer.forward(x, &trace);
  for (double g : trace.gate1.values()) CHECK(g == 0.5);
  for (double g : trace.gate2.values()) CHECK(g == 0.5);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    CHECK(trace.y.values()[i] == x.values()[i] + 0.5);
    CHECK(trace.z.values()[i] == x.values()[i] + 1.0);
  }
  CHECK(out.shape() == x.shape());
}

TEST_CASE("gate activations stay strictly inside (0, 1)") {
  Rng rng(8);
  for (auto mode : {nn::GateMode::kLiteral, nn::GateMode::kMultiplicative}) {
    nn::GatedTXLLayer layer({8, 4, 0, 0.0, mode}, rng);
    for (double scale_factor : {1.0, 100.0, 1e6}) {
      const auto x = scale(random_tensor(Shape{2, 5, 8}, rng, -1, 1, false), scale_factor);
      nn::GatedLayerTrace trace;
      const auto out = layer.forward(x, &trace);
      for (const Tensor* g : {&trace.gate1, &trace.gate2})
        for (double v : g->values()) {
          CHECK(v > 0.0);
          CHECK(v < 1.0);
        }
      for (double v : out.values()) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("gated encoder composition") {
  Rng rng(9);
  const std::size_t d = 8;
  nn::GatedLayerConfig cfg{d, 2, 16, 0.0, nn::GateMode::kLiteral};
  CHECK_THROWS_AS(nn::GatedEncoder(cfg, 0, rng), ConfigError);

  SUBCASE("one layer equals the layer itself") {
    nn::GatedEncoder enc(cfg, 1, rng);
    const auto x = random_tensor(Shape{2, 4, d}, rng, -1, 1, false);
    const auto a = enc.forward(x);
    const auto b = enc.layer(0).forward(x);
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.values()[i] == b.values()[i]);
  }
  SUBCASE("shape preserved through four layers") {
    nn::GatedEncoder enc(cfg, 4, rng);
    CHECK(enc.forward(Tensor::zeros(Shape{3, 7, d})).shape() == Shape{3, 7, d});
  }
  SUBCASE("zero gates match a hand-stepped two-layer oracle") {
    nn::GatedEncoder enc(cfg, 2, rng);
    std::vector<std::vector<double>> gains, shifts;
    for (std::size_t l = 0; l < 2; ++l) {
      const std::string p = "layers." + std::to_string(l) + ".";
      for (const char* g : {"gate1.weight", "gate1.bias", "gate2.weight", "gate2.bias"})
        fill_state(enc, p + g, 0.0);
      gains.push_back(to_vec(random_tensor(Shape{d}, rng, 0.5, 2.0, false)));
      shifts.push_back(to_vec(random_tensor(Shape{d}, rng, -1.0, 1.0, false)));
      set_state(enc, p + "norm_out.gain", gains.back());
      set_state(enc, p + "norm_out.shift", shifts.back());
    }
    const auto x = random_tensor(Shape{2, 5, d}, rng, -3, 3, false);
    auto h = to_vec(x);
    for (std::size_t l = 0; l < 2; ++l) {
      for (double& v : h) v = v + 0.5 + 0.5;
      h = ref_layer_norm(h, d, gains[l], shifts[l]);
    }
    const auto out = enc.forward(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) worst = std::max(worst, std::abs(out.values()[i] - h[i]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("gate mode parsing") {
  CHECK(nn::parse_gate_mode("literal") == nn::GateMode::kLiteral);
  CHECK(nn::parse_gate_mode("multiplicative") == nn::GateMode::kMultiplicative);
  CHECK_THROWS_AS(nn::parse_gate_mode("additive"), ConfigError);
}

TEST_CASE("attention pooling") {
  Rng rng(10);
  nn::AttentionPooling pool(4, rng);
  const auto single = random_tensor(Shape{2, 1, 4}, rng, -1, 1, false);
  const auto y1 = pool.forward(single);
  for (std::size_t i = 0; i < 8; ++i) CHECK(y1.values()[i] == single.values()[i]);

  const auto x = random_tensor(Shape{3, 25, 4}, rng, -5, 5, false);
  Tensor w;
  const auto y = pool.forward(x, &w);
  CHECK(y.shape() == Shape{3, 4});
  for (std::size_t b = 0; b < 3; ++b) {
    double total = 0.0;
    for (std::size_t s = 0; s < 25; ++s) {
      CHECK(w.at({b, s}) >= 0.0);
      total += w.at({b, s});
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }

  fill_state(pool, "score.weight", 0.0);
  const auto m = pool.forward(x);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t j = 0; j < 4; ++j) {
      double mean_v = 0.0;
      for (std::size_t s = 0; s < 25; ++s) mean_v += x.at({b, s, j});
      CHECK(std::abs(m.at({b, j}) - mean_v / 25.0) < 1e-12);
    }
  nn::AttentionPooling wide(64, rng);
  CHECK(wide.forward(Tensor::zeros(Shape{3, 25, 64})).shape() == Shape{3, 64});
}

TEST_CASE("positional embedding") {
  Rng rng(11);
  nn::PositionalEmbedding pe(6, 4, rng);
  const auto x = random_tensor(Shape{2, 5, 4}, rng, -1, 1, false);
  const auto y = pe.forward(x);
  for (std::size_t s = 0; s < 5; ++s)
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t b = 0; b < 2; ++b)
        CHECK(y.at({b, s, j}) == x.at({b, s, j}) + pe.table().at({0, s, j}));
    }
  CHECK_THROWS_AS(pe.forward(Tensor::zeros(Shape{1, 7, 4})), DimensionError);

  fill_state(pe, "table", 0.0);
  const auto same = pe.forward(x);
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(same.values()[i] == x.values()[i]);

  // d sum(PE(x)) / d table = B for every used position, 0 for unused ones.
  auto table = pe.table();
  table.clear_grad();
  sum(pe.forward(x)).backward();
  for (std::size_t s = 0; s < 6; ++s)
    for (std::size_t j = 0; j < 4; ++j) CHECK(table.grad()[s * 4 + j] == (s < 5 ? 2.0 : 0.0));
  auto r = check_gradients([&] { return probe(pe.forward(x), 3); }, leaves_of(pe));
  INFO(r.worst);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("every layer passes the finite-difference gradient check") {
  Rng rng(12);
  auto run = [](const std::function<Tensor()>& f, std::vector<std::pair<std::string, Tensor>> ls) {
    auto r = check_gradients(f, std::move(ls), 1e-5, 40, 7);
    INFO(r.worst);
    CHECK(r.max_rel_error < 1e-4);
  };
  SUBCASE("linear") {
    nn::Linear lin(3, 4, rng);
    set_state(lin, "bias", to_vec(random_tensor(Shape{4}, rng, -1, 1, false)));
    auto x = random_tensor(Shape{2, 3}, rng);
    auto ls = leaves_of(lin);
    ls.emplace_back("x", x);
    run([&] { return probe(lin.forward(x), 1); }, ls);
  }
  SUBCASE("conv2d and batch norm") {
    nn::Conv2d conv(2, 3, 3, 2, rng);
    nn::BatchNorm2d bn(3);
    auto x = random_tensor(Shape{3, 2, 7, 7}, rng);
    auto ls = leaves_of(conv);
    for (auto& p : leaves_of(bn)) ls.push_back(p);
    ls.emplace_back("x", x);
    run([&] { return probe(relu(bn.forward(conv.forward(x))), 2); }, ls);
  }
  SUBCASE("layer norm") {
    nn::LayerNorm ln(5);
    set_state(ln, "gain", to_vec(random_tensor(Shape{5}, rng, 0.5, 1.5, false)));
    auto x = random_tensor(Shape{3, 5}, rng);
    auto ls = leaves_of(ln);
    ls.emplace_back("x", x);
    run([&] { return probe(ln.forward(x), 3); }, ls);
  }
  SUBCASE("multi-head attention") {
    nn::MultiHeadAttention mha(8, 2, rng);
    auto x = random_tensor(Shape{2, 3, 8}, rng);
    auto ls = leaves_of(mha);
    ls.emplace_back("x", x);
    run([&] { return probe(mha.forward(x), 4); }, ls);
  }
  SUBCASE("gated layers in both modes") {
    for (auto mode : {nn::GateMode::kLiteral, nn::GateMode::kMultiplicative}) {
      nn::GatedEncoder enc({8, 2, 12, 0.0, mode}, 2, rng);
      auto x = random_tensor(Shape{2, 3, 8}, rng);
      auto ls = leaves_of(enc);
      ls.emplace_back("x", x);
      run([&] { return probe(enc.forward(x), 5); }, ls);
    }
  }
  SUBCASE("attention pooling") {
    nn::AttentionPooling pool(6, rng);
    auto x = random_tensor(Shape{2, 4, 6}, rng);
    auto ls = leaves_of(pool);
    ls.emplace_back("x", x);
    run([&] { return probe(pool.forward(x), 6); }, ls);
  }
}

TEST_CASE("dropout inside the gated layer only acts in training mode") {
  Rng rng(13);
  nn::GatedTXLLayer layer({8, 2, 0, 0.5, nn::GateMode::kLiteral}, rng, 99);
  const auto x = random_tensor(Shape{1, 3, 8}, rng, -1, 1, false);
  layer.set_training(false);
  const auto a = layer.forward(x);
  const auto b = layer.forward(x);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.values()[i] == b.values()[i]);
  layer.set_training(true);
  const auto c = layer.forward(x);
  bool differs = false;
  for (std::size_t i = 0; i < a.numel(); ++i) differs |= a.values()[i] != c.values()[i];
  CHECK(differs);
}

}  // namespace
}  // namespace qforge
