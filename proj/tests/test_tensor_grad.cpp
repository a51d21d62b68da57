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
#include "qforge/ops.hpp"
#include "support/finite_diff.hpp"

namespace qforge {
namespace {

using testing::check_gradients;
using testing::random_tensor;

// Weighted sum with fixed random weights so that every output coordinate
// carries a distinct upstream gradient.
Tensor probe(const Tensor& y, std::uint64_t seed) {
  Rng rng(seed);
  const auto w = random_tensor(y.shape(), rng, -1, 1, false);
  return sum(mul(y, w));
}

void expect_close(const testing::GradCheckReport& r, double tol) {
  INFO(r.worst);
  CHECK(r.coordinates > 0);
  CHECK(r.max_rel_error < tol);
}

TEST_CASE("matmul gradients match finite differences to 1e-6") {
  Rng rng(10);
  auto a = random_tensor(Shape{3, 4}, rng);
  auto b = random_tensor(Shape{4, 5}, rng);
  expect_close(check_gradients([&] { return probe(matmul(a, b), 1); }, {{"a", a}, {"b", b}}),
               1e-6);
}

TEST_CASE("bmm and linear gradients") {
  Rng rng(11);
  auto a = random_tensor(Shape{2, 3, 4}, rng);
  auto b = random_tensor(Shape{2, 4, 2}, rng);
  expect_close(check_gradients([&] { return probe(bmm(a, b), 2); }, {{"a", a}, {"b", b}}), 1e-6);

  auto x = random_tensor(Shape{2, 3, 4}, rng);
  auto w = random_tensor(Shape{4, 5}, rng);
  auto bias = random_tensor(Shape{5}, rng);
  expect_close(check_gradients([&] { return probe(linear(x, w, bias), 3); },
                               {{"x", x}, {"w", w}, {"bias", bias}}),
               1e-6);
}

TEST_CASE("conv2d gradients") {
  Rng rng(12);
  auto x = random_tensor(Shape{2, 2, 7, 6}, rng);
  auto k = random_tensor(Shape{3, 2, 3, 3}, rng);
  auto bias = random_tensor(Shape{3}, rng);
  for (std::size_t stride : {1, 2}) {
    CAPTURE(stride);
    expect_close(check_gradients([&] { return probe(conv2d(x, k, bias, stride), 4); },
                                 {{"x", x}, {"k", k}, {"bias", bias}}),
                 1e-6);
  }
}

TEST_CASE("softmax, layer_norm and conv composite to 1e-5") {
  Rng rng(13);
  auto x = random_tensor(Shape{2, 1, 6, 6}, rng);
  auto k = random_tensor(Shape{2, 1, 3, 3}, rng);
  auto g = random_tensor(Shape{4}, rng, 0.5, 1.5);
  auto s = random_tensor(Shape{4}, rng);
  auto loss = [&] {
    auto y = conv2d(x, k, Tensor(), 1);          // [2,2,4,4]
    y = layer_norm(y, g, s);                      // over last axis of 4
    y = softmax(y, 2);                            // across rows
    return probe(y, 5);
  };
  expect_close(check_gradients(loss, {{"x", x}, {"k", k}, {"g", g}, {"s", s}}), 1e-5);
}

TEST_CASE("elementwise and shape op gradients") {
  Rng rng(14);
  auto a = random_tensor(Shape{2, 3, 4}, rng);
  auto b = random_tensor(Shape{2, 3, 4}, rng);
  auto row = random_tensor(Shape{4}, rng);
  auto pe = random_tensor(Shape{1, 3, 4}, rng);

  SUBCASE("add with broadcast") {
    expect_close(check_gradients([&] { return probe(add(add(a, row), pe), 6); },
                                 {{"a", a}, {"row", row}, {"pe", pe}}),
                 1e-4);
  }
  SUBCASE("sub, mul, scale, add_scalar") {
    expect_close(check_gradients(
                     [&] { return probe(add_scalar(scale(mul(sub(a, b), b), 1.7), 0.3), 7); },
                     {{"a", a}, {"b", b}}),
                 1e-4);
  }
  SUBCASE("relu and sigmoid") {
    expect_close(check_gradients([&] { return probe(sigmoid(relu(a)), 8); }, {{"a", a}}), 1e-4);
  }
  SUBCASE("permute, transpose, narrow, concat, reshape") {
    auto loss = [&] {
      auto y = permute(a, {1, 2, 0});
      y = transpose_last(y);
      y = narrow(y, 0, 1, 2);
      y = concat_last(y, y);
      return probe(reshape(y, Shape{16, 2}), 9);
    };
    expect_close(check_gradients(loss, {{"a", a}}), 1e-4);
  }
  SUBCASE("unfold_patches") {
    auto img = random_tensor(Shape{2, 2, 5, 7}, rng);
    expect_close(check_gradients([&] { return probe(unfold_patches(img, 2), 10); },
                                 {{"img", img}}),
                 1e-4);
  }
}

TEST_CASE("normalization gradients") {
  Rng rng(15);
  SUBCASE("batch_norm training") {
    auto x = random_tensor(Shape{3, 2, 3, 2}, rng);
    auto gamma = random_tensor(Shape{2}, rng, 0.5, 1.5);
    auto beta = random_tensor(Shape{2}, rng);
    auto loss = [&] {
      BatchNormStats stats{Tensor::zeros(Shape{2}), Tensor::full(Shape{2}, 1.0)};
      return probe(batch_norm(x, gamma, beta, stats, true), 11);
    };
    expect_close(check_gradients(loss, {{"x", x}, {"gamma", gamma}, {"beta", beta}}), 1e-4);
  }
  SUBCASE("batch_norm eval") {
    auto x = random_tensor(Shape{1, 2, 2, 2}, rng);
    auto gamma = random_tensor(Shape{2}, rng, 0.5, 1.5);
    auto beta = random_tensor(Shape{2}, rng);
    BatchNormStats stats{Tensor::from(Shape{2}, {0.1, -0.2}), Tensor::from(Shape{2}, {2.0, 0.5})};
    auto loss = [&] { return probe(batch_norm(x, gamma, beta, stats, false), 12); };
    expect_close(check_gradients(loss, {{"x", x}, {"gamma", gamma}, {"beta", beta}}), 1e-4);
  }
  SUBCASE("softmax along each axis") {
    auto x = random_tensor(Shape{2, 3, 4}, rng, -3, 3);
    for (int axis : {0, 1, 2}) {
      CAPTURE(axis);
      expect_close(check_gradients([&] { return probe(softmax(x, axis), 13); }, {{"x", x}}),
                   1e-4);
    }
  }
}

TEST_CASE("loss and reduction gradients") {
  Rng rng(16);
  auto p = random_tensor(Shape{6}, rng, -3, 3);
  auto t = random_tensor(Shape{6}, rng, -3, 3);
  expect_close(check_gradients([&] { return mse_loss(p, t); }, {{"p", p}, {"t", t}}), 1e-4);
  expect_close(check_gradients([&] { return huber_loss(p, t, 1.0); }, {{"p", p}, {"t", t}}),
               1e-4);
  auto q = random_tensor(Shape{4, 3}, rng);
  const std::vector<std::int64_t> idx{0, 2, 2, 1};
  expect_close(check_gradients([&] { return mean(scale(gather_last(q, idx), 3.0)); }, {{"q", q}}),
               1e-4);
}

TEST_CASE("a tensor used twice accumulates both path gradients") {
  Rng rng(17);
  auto x = random_tensor(Shape{3, 3}, rng);
  auto w = random_tensor(Shape{3, 3}, rng);
  auto loss = [&] {
    auto h = matmul(x, w);
    return probe(add(mul(h, h), matmul(h, x)), 14);
  };
  expect_close(check_gradients(loss, {{"x", x}, {"w", w}}), 1e-4);

  auto v = Tensor::from(Shape{2}, {1.5, -0.5}, true);
  sum(add(v, v)).backward();
  CHECK(v.grad()[0] == 2.0);
  CHECK(v.grad()[1] == 2.0);
  // Gradients accumulate across backward calls until cleared.
  sum(v).backward();
  CHECK(v.grad()[0] == 3.0);
}

}  // namespace
}  // namespace qforge
