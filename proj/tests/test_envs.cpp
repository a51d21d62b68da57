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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qforge/envs.hpp"

namespace qforge {
namespace {

RawFrame solid(std::uint8_t r, std::uint8_t g, std::uint8_t b, std::size_t h = 220,
               std::size_t w = 168) {
  RawFrame f{h, w, std::vector<std::uint8_t>(h * w * 3)};
  for (std::size_t i = 0; i < h * w; ++i) {
    f.rgb[3 * i] = r;
    f.rgb[3 * i + 1] = g;
    f.rgb[3 * i + 2] = b;
  }
  return f;
}

// Independent bilinear oracle: explicit (1 - t) a + t b weights and a direct
// source-coordinate formula per pixel.
double oracle_pixel(const RawFrame& f, std::size_t oy, std::size_t ox) {
  auto gray = [&](std::size_t y, std::size_t x) {
    return (0.299 * f.at(y, x, 0) + 0.587 * f.at(y, x, 1) + 0.114 * f.at(y, x, 2)) / 255.0;
  };
  const double sy = (double(oy + 13) + 0.5) * double(f.height) / 110.0 - 0.5;
  const double sx = (double(ox) + 0.5) * double(f.width) / 84.0 - 0.5;
  const double cy = std::min(std::max(sy, 0.0), double(f.height - 1));
  const double cx = std::min(std::max(sx, 0.0), double(f.width - 1));
  const std::size_t y0 = std::size_t(cy), x0 = std::size_t(cx);
  const std::size_t y1 = std::min(y0 + 1, f.height - 1), x1 = std::min(x0 + 1, f.width - 1);
  const double ty = cy - double(y0), tx = cx - double(x0);
  const double v = (1 - ty) * ((1 - tx) * gray(y0, x0) + tx * gray(y0, x1)) +
                   ty * ((1 - tx) * gray(y1, x0) + tx * gray(y1, x1));
  return 2.0 * v - 1.0;
}

TEST_CASE("preprocess_frame on solid frames") {
  const auto white = preprocess_frame(solid(255, 255, 255));
  CHECK(white.shape() == Shape{84, 84});
  for (double v : white.values()) CHECK(v == 1.0);
  const auto black = preprocess_frame(solid(0, 0, 0));
  for (double v : black.values()) CHECK(v == -1.0);
  const auto red = preprocess_frame(solid(255, 0, 0));
  for (double v : red.values()) CHECK(std::abs(v - (2 * 0.299 - 1)) < 1e-15);
}

TEST_CASE("preprocess_frame matches an independent bilinear oracle") {
  Rng rng(1);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{220, 168}, {210, 160}, {97, 61}}) {
    RawFrame f{h, w, std::vector<std::uint8_t>(h * w * 3)};
    for (auto& b : f.rgb) b = static_cast<std::uint8_t>(rng.uniform_int(256));
    const auto out = preprocess_frame(f);
    CHECK(out.shape() == Shape{84, 84});
    double worst = 0.0;
    for (std::size_t y = 0; y < 84; ++y)
      for (std::size_t x = 0; x < 84; ++x) {
        const double v = out.at({y, x});
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
        worst = std::max(worst, std::abs(v - oracle_pixel(f, y, x)));
      }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("catch frames map each cell onto a 4x4 block") {
  CatchEnv env(42);
  env.reset_to(3);
  auto r = env.step(CatchEnv::kRight);
  r = env.step(CatchEnv::kRight);
  const auto img = preprocess_frame(r.frame);
  const double background = 128.0 / 255.0 * 2.0 - 1.0;
  for (std::size_t y = 0; y < 84; ++y)
    for (std::size_t x = 0; x < 84; ++x) {
      const std::size_t row = y / 4, col = x / 4;
      const bool lit = (row == env.ball_row() && col == env.ball_col()) ||
                       (row == 20 && col == env.paddle_col());
      CHECK(std::abs(img.at({y, x}) - (lit ? 1.0 : background)) < 1e-15);
    }
}

TEST_CASE("catch rules") {
  CatchEnv env(42);
  SUBCASE("mid-fall steps give zero reward") {
    env.reset_to(10);
    for (int i = 0; i < 19; ++i) {
      const auto r = env.step(CatchEnv::kStay);
      CHECK(r.reward == 0.0);
      CHECK_FALSE(r.done);
    }
    const auto last = env.step(CatchEnv::kStay);
    CHECK(last.reward == 1.0);
    CHECK(last.done);
    CHECK(env.steps() == 20);
    CHECK_THROWS_AS(env.step(CatchEnv::kStay), std::logic_error);
  }
  SUBCASE("missing the ball gives -1") {
    env.reset_to(0);
    StepResult r;
    for (int i = 0; i < 20; ++i) r = env.step(CatchEnv::kRight);
    CHECK(env.paddle_col() == 20);
    CHECK(r.reward == -1.0);
    CHECK(r.done);
  }
  SUBCASE("paddle is clamped at the walls") {
    env.reset_to(5);
    for (int i = 0; i < 15; ++i) env.step(CatchEnv::kLeft);
    CHECK(env.paddle_col() == 0);
  }
  CHECK_THROWS_AS(env.step(3), std::out_of_range);
  CHECK_THROWS_AS(env.step(-1), std::out_of_range);
}

TEST_CASE("catch is always winnable by chasing the ball") {
  CatchEnv env(42);
  for (std::size_t col = 0; col < CatchEnv::kGrid; ++col) {
    env.reset_to(col);
    StepResult r;
    do {
      const auto a = env.ball_col() < env.paddle_col()   ? CatchEnv::kLeft
                     : env.ball_col() > env.paddle_col() ? CatchEnv::kRight
                                                         : CatchEnv::kStay;
      r = env.step(a);
    } while (!r.done);
    CHECK(r.reward == 1.0);
  }
}

TEST_CASE("reset determinism") {
  for (const auto& name : env_names()) {
    CAPTURE(name);
    auto a = make_env(name, 42);
    auto b = make_env(name, 7);
    const auto fa = a->reset(42);
    const auto fb = b->reset(42);
    CHECK(fa == fb);
    CHECK(a->steps() == 0);
    Rng actions(3);
    for (int t = 0; t < 300; ++t) {
      const auto act = static_cast<std::int64_t>(actions.uniform_int(a->spec().action_count));
      const auto ra = a->step(act);
      const auto rb = b->step(act);
      CHECK(ra.frame == rb.frame);
      CHECK(ra.reward == rb.reward);
      CHECK(ra.done == rb.done);
      if (ra.done) {
        a->reset();
        b->reset();
      }
    }
    a->reset(42);
    CHECK(a->steps() == 0);
  }
  CHECK_THROWS_AS(make_env("pong"), ConfigError);
}

TEST_CASE("gauntlet seeds change the spawn column") {
  GauntletEnv env(42);
  env.reset(42);
  const auto base = env.enemies().front().col;
  bool differs = false;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    env.reset(s);
    differs |= env.enemies().front().col != base;
  }
  CHECK(differs);
}

TEST_CASE("gauntlet rules") {
  GauntletEnv env(42);
  env.reset(42);
  const std::size_t target = env.enemies().front().col;
  REQUIRE(env.enemies().front().row == 0);
  while (env.player_col() != target)
    env.step(env.player_col() < target ? GauntletEnv::kRight : GauntletEnv::kLeft);
  double total = 0.0;
  bool hit = false;
  env.step(GauntletEnv::kFire);
  REQUIRE(env.bullet().has_value());
  const auto in_flight = *env.bullet();
  env.step(GauntletEnv::kFire);  // ignored while a bullet is in flight
  CHECK(env.bullet()->row + 1 == in_flight.row);
  for (int t = 0; t < 30 && !hit; ++t) {
    const auto r = env.step(GauntletEnv::kNoop);
    total += r.reward;
    hit = r.reward >= 10.0;
  }
  CHECK(hit);
  CHECK(total >= 10.0);

  // Doing nothing lets enemies land until the lives run out.
  env.reset(42);
  std::size_t steps = 0;
  double penalty = 0.0;
  StepResult r;
  do {
    r = env.step(GauntletEnv::kNoop);
    penalty += r.reward;
    ++steps;
  } while (!r.done);
  CHECK((env.lives() == 0 || steps == 500));
  if (env.lives() == 0) CHECK(penalty == -3.0);
  CHECK(steps <= 500);
}

TEST_CASE("frame stack") {
  FrameStack stack(3);
  auto frame = [](double v) { return Tensor::full(Shape{84, 84}, v); };
  const auto s0 = stack.reset(frame(0.25));
  CHECK(s0.shape() == Shape{3, 84, 84});
  for (double v : s0.values()) CHECK(v == 0.25);
  stack.push(frame(1));
  stack.push(frame(2));
  const auto s = stack.push(frame(3));
  CHECK(s.at({0, 5, 5}) == 1.0);
  CHECK(s.at({1, 5, 5}) == 2.0);
  CHECK(s.at({2, 5, 5}) == 3.0);
  CHECK_THROWS_AS(stack.push(Tensor::zeros(Shape{84, 83})), DimensionError);
}

TEST_CASE("ppm dump") {
  CatchEnv env(42);
  const auto f = env.reset();
  const auto path = std::filesystem::temp_directory_path() / "qforge_catch.ppm";
  write_ppm(path, f);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  CHECK(magic == "P6");
  CHECK(w == 168);
  CHECK(h == 220);
  CHECK(maxv == 255);
  CHECK(std::filesystem::file_size(path) == 15 + 220 * 168 * 3);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace qforge
