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
#include <stdexcept>

#include "qforge/envs.hpp"

namespace qforge {

namespace {

constexpr std::size_t kRawHeight = 220;
constexpr std::size_t kRawWidth = 168;
constexpr std::size_t kCell = 8;
constexpr std::size_t kGridTop = 26;

struct Rgb {
  std::uint8_t r, g, b;
};

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kGreen{0, 255, 0};
constexpr Rgb kRed{255, 0, 0};
constexpr Rgb kYellow{255, 255, 0};
constexpr Rgb kGray{96, 96, 96};
constexpr std::uint8_t kCatchBackground = 128;

RawFrame blank_frame(std::uint8_t level = 0) {
  return {kRawHeight, kRawWidth, std::vector<std::uint8_t>(kRawHeight * kRawWidth * 3, level)};
}

void fill_rect(RawFrame& f, std::size_t top, std::size_t left, std::size_t h, std::size_t w,
               Rgb c) {
  for (std::size_t y = top; y < top + h; ++y)
    for (std::size_t x = left; x < left + w; ++x) {
      auto* p = &f.rgb[(y * f.width + x) * 3];
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
    }
}

void fill_cell(RawFrame& f, std::size_t row, std::size_t col, Rgb c) {
  fill_rect(f, kGridTop + row * kCell, col * kCell, kCell, kCell, c);
}

void check_action(std::int64_t action, const EnvSpec& spec) {
  if (action < 0 || static_cast<std::size_t>(action) >= spec.action_count)
    throw std::out_of_range(spec.name + ": action " + std::to_string(action) + " outside [0, " +
                            std::to_string(spec.action_count) + ")");
}

std::size_t shift(std::size_t col, int delta, std::size_t grid) {
  if (delta < 0) return col == 0 ? 0 : col - 1;
  if (delta > 0) return std::min(col + 1, grid - 1);
  return col;
}

}  // namespace

// ---- Catch -------------------------------------------------------------------

CatchEnv::CatchEnv(std::uint64_t seed)
    : spec_{"catch", 3, {"LEFT", "STAY", "RIGHT"}, kRawHeight, kRawWidth, kGrid - 1, seed},
      rng_(seed) {}

RawFrame CatchEnv::reset(std::optional<std::uint64_t> seed) {
  if (seed) {
    spec_.seed = *seed;
    rng_.reseed(*seed);
  }
  return reset_to(static_cast<std::size_t>(rng_.uniform_int(kGrid)));
}

RawFrame CatchEnv::reset_to(std::size_t ball_col) {
  if (ball_col >= kGrid) throw std::out_of_range("catch: ball column out of range");
  ball_row_ = 0;
  ball_col_ = ball_col;
  paddle_col_ = kGrid / 2;
  steps_ = 0;
  done_ = false;
  return render();
}

StepResult CatchEnv::step(std::int64_t action) {
  check_action(action, spec_);
  if (done_) throw std::logic_error("catch: step after episode end");
  paddle_col_ = shift(paddle_col_, static_cast<int>(action) - 1, kGrid);
  ++ball_row_;
  ++steps_;
  double reward = 0.0;
  if (ball_row_ == kGrid - 1) {
    reward = ball_col_ == paddle_col_ ? 1.0 : -1.0;
    done_ = true;
  }
  return {render(), reward, done_};
}

RawFrame CatchEnv::render() const {
  RawFrame f = blank_frame(kCatchBackground);
  fill_cell(f, kGrid - 1, paddle_col_, kWhite);
  fill_cell(f, ball_row_, ball_col_, kWhite);
  return f;
}

// ---- Gauntlet ----------------------------------------------------------------

GauntletEnv::GauntletEnv(std::uint64_t seed)
    : spec_{"gauntlet", 4, {"NOOP", "LEFT", "RIGHT", "FIRE"}, kRawHeight, kRawWidth, 500, seed},
      rng_(seed) {}

RawFrame GauntletEnv::reset(std::optional<std::uint64_t> seed) {
  if (seed) {
    spec_.seed = *seed;
    rng_.reseed(*seed);
  }
  enemies_.clear();
  enemies_.push_back({0, static_cast<std::size_t>(rng_.uniform_int(kGrid))});
  bullet_.reset();
  player_col_ = kGrid / 2;
  lives_ = kLives;
  steps_ = 0;
  done_ = false;
  return render();
}

double GauntletEnv::resolve_hits() {
  if (!bullet_) return 0.0;
  const auto hit = std::find(enemies_.begin(), enemies_.end(), *bullet_);
  if (hit == enemies_.end()) return 0.0;
  enemies_.erase(hit);
  bullet_.reset();
  return 10.0;
}

StepResult GauntletEnv::step(std::int64_t action) {
  check_action(action, spec_);
  if (done_) throw std::logic_error("gauntlet: step after episode end");
  ++steps_;
  double reward = 0.0;

  bool fired = false;
  switch (action) {
    case kLeft:
      player_col_ = shift(player_col_, -1, kGrid);
      break;
    case kRight:
      player_col_ = shift(player_col_, 1, kGrid);
      break;
    case kFire:
      if (!bullet_) {
        bullet_ = Cell{kGrid - 2, player_col_};
        fired = true;
      }
      break;
    default:
      break;
  }

  if (bullet_ && !fired) {
    if (bullet_->row == 0) {
      bullet_.reset();
    } else {
      --bullet_->row;
    }
  }
  reward += resolve_hits();

  if (steps_ % 2 == 0) {
    for (auto& e : enemies_) ++e.row;
    reward += resolve_hits();
  }

  const auto landed = std::remove_if(enemies_.begin(), enemies_.end(),
                                     [](const Cell& e) { return e.row >= kGrid - 1; });
  for (auto it = landed; it != enemies_.end(); ++it) {
    reward -= 1.0;
    if (lives_ > 0) --lives_;
  }
  enemies_.erase(landed, enemies_.end());

  if (rng_.bernoulli(kSpawnProbability)) {
    const Cell cell{0, static_cast<std::size_t>(rng_.uniform_int(kGrid))};
    if (std::find(enemies_.begin(), enemies_.end(), cell) == enemies_.end())
      enemies_.push_back(cell);
  }

  done_ = lives_ == 0 || steps_ >= spec_.max_steps;
  return {render(), reward, done_};
}

RawFrame GauntletEnv::render() const {
  RawFrame f = blank_frame();
  // Lives indicator in the band above the grid; the crop removes it.
  for (std::size_t i = 0; i < lives_; ++i) fill_rect(f, 8, 8 + i * 12, 8, 8, kGray);
  for (const auto& e : enemies_) fill_cell(f, e.row, e.col, kRed);
  if (bullet_) fill_cell(f, bullet_->row, bullet_->col, kYellow);
  fill_cell(f, kGrid - 1, player_col_, kGreen);
  return f;
}

// ---- registry ----------------------------------------------------------------

std::vector<std::string> env_names() { return {"catch", "gauntlet"}; }

namespace {

struct ExternalGame {
  const char* name;
  std::size_t actions;
};

// Default action sets of the emulator games named by the reference presets.
constexpr ExternalGame kExternalGames[] = {
    {"ale:Centipede", 18},
    {"ale:Asteroids", 14},
    {"ale:SpaceInvaders", 6},
};

}  // namespace

std::optional<std::size_t> env_action_count(const std::string& name) {
  if (name == "catch") return 3;
  if (name == "gauntlet") return 4;
  for (const auto& g : kExternalGames)
    if (name == g.name) return g.actions;
  return std::nullopt;
}

std::unique_ptr<Environment> make_env(const std::string& name, std::uint64_t seed) {
  if (name == "catch") return std::make_unique<CatchEnv>(seed);
  if (name == "gauntlet") return std::make_unique<GauntletEnv>(seed);
  if (env_action_count(name))
    throw ConfigError("env: '" + name +
                      "' needs an external emulator adapter, which is not bundled; "
                      "built-in environments are catch and gauntlet");
  throw ConfigError("env: unknown environment '" + name + "' (expected catch or gauntlet)");
}

}  // namespace qforge
