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

// Desk-scale arcade environments and the frame pipeline that feeds the
// networks: grayscale, bilinear resize to 110x84, center crop to 84x84,
// normalize to [-1, 1], stack the last F frames.
//
// Both games draw a 21x21 cell grid with 8x8-pixel cells at rows 26..193 of
// a 220x168 RGB frame, so the 2:1 resize and the crop land every cell on an
// exact 4x4 block of the 84x84 output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qforge/rng.hpp"
#include "qforge/tensor.hpp"

namespace qforge {

inline constexpr std::size_t kFrameSide = 84;
inline constexpr std::size_t kResizeHeight = 110;

struct RawFrame {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  std::uint8_t at(std::size_t y, std::size_t x, std::size_t channel) const {
    return rgb[(y * width + x) * 3 + channel];
  }
  friend bool operator==(const RawFrame&, const RawFrame&) = default;
};

struct EnvSpec {
  std::string name;
  std::size_t action_count = 0;
  std::vector<std::string> action_labels;
  std::size_t frame_height = 0;
  std::size_t frame_width = 0;
  std::size_t max_steps = 0;
  std::uint64_t seed = 42;
};

struct StepResult {
  RawFrame frame;
  double reward = 0.0;
  bool done = false;
};

// Adapter interface; an external emulator binding would implement this.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  // Reseeds when a seed is given, otherwise continues the current stream.
  virtual RawFrame reset(std::optional<std::uint64_t> seed = std::nullopt) = 0;
  // Throws std::out_of_range for an invalid action and std::logic_error when
  // called on a finished episode.
  virtual StepResult step(std::int64_t action) = 0;
  virtual std::size_t steps() const = 0;
};

std::vector<std::string> env_names();
// Action count for a built-in environment or a known emulator game name
// ("ale:<Game>"), nullopt otherwise.
std::optional<std::size_t> env_action_count(const std::string& name);
// Throws ConfigError for an unknown name and for emulator games.
std::unique_ptr<Environment> make_env(const std::string& name, std::uint64_t seed = 42);

// ---- Catch -----------------------------------------------------------------
//
// A ball starts in row 0 at a seeded random column and falls one row per step.
// The one-cell paddle starts in column 10 of row 20 and moves LEFT/STAY/RIGHT
// (clamped) before the ball falls. When the ball reaches row 20 the episode
// ends with +1 if the paddle is under it and -1 otherwise; every other step
// gives 0. Episodes last exactly 20 steps.

class CatchEnv : public Environment {
 public:
  static constexpr std::size_t kGrid = 21;
  enum Action : std::int64_t { kLeft = 0, kStay = 1, kRight = 2 };

  explicit CatchEnv(std::uint64_t seed = 42);

  const EnvSpec& spec() const override { return spec_; }
  RawFrame reset(std::optional<std::uint64_t> seed = std::nullopt) override;
  StepResult step(std::int64_t action) override;
  std::size_t steps() const override { return steps_; }

  std::size_t ball_row() const { return ball_row_; }
  std::size_t ball_col() const { return ball_col_; }
  std::size_t paddle_col() const { return paddle_col_; }

  // Starts an episode with the ball in a chosen column.
  RawFrame reset_to(std::size_t ball_col);

 private:
  RawFrame render() const;

  EnvSpec spec_;
  Rng rng_;
  std::size_t ball_row_ = 0, ball_col_ = 0, paddle_col_ = 10, steps_ = 0;
  bool done_ = false;
};

// ---- Gauntlet --------------------------------------------------------------
//
// The player sits in row 20 and can NOOP, move LEFT/RIGHT, or FIRE a bullet
// (one in flight at a time, spawned in row 19 above the player). Each tick:
//   1. apply the action;
//   2. a bullet fired on an earlier tick moves up one row and is removed
//      when it leaves the grid;
//   3. a bullet sharing a cell with an enemy destroys it: +10;
//   4. on even ticks every enemy descends one row, then step 3 repeats;
//   5. an enemy reaching row 20 is removed: -1 and one life lost;
//   6. with probability 0.1 a new enemy appears in row 0 at a random free
//      column.
// Reset places one enemy in row 0 at a random column and restores 3 lives.
// The episode ends when the lives run out or after 500 steps.

class GauntletEnv : public Environment {
 public:
  static constexpr std::size_t kGrid = 21;
  static constexpr std::size_t kLives = 3;
  static constexpr double kSpawnProbability = 0.1;
  enum Action : std::int64_t { kNoop = 0, kLeft = 1, kRight = 2, kFire = 3 };

  explicit GauntletEnv(std::uint64_t seed = 42);

  const EnvSpec& spec() const override { return spec_; }
  RawFrame reset(std::optional<std::uint64_t> seed = std::nullopt) override;
  StepResult step(std::int64_t action) override;
  std::size_t steps() const override { return steps_; }

  struct Cell {
    std::size_t row, col;
    friend bool operator==(const Cell&, const Cell&) = default;
  };
  const std::vector<Cell>& enemies() const { return enemies_; }
  std::size_t player_col() const { return player_col_; }
  std::size_t lives() const { return lives_; }
  const std::optional<Cell>& bullet() const { return bullet_; }

 private:
  RawFrame render() const;
  double resolve_hits();

  EnvSpec spec_;
  Rng rng_;
  std::vector<Cell> enemies_;
  std::optional<Cell> bullet_;
  std::size_t player_col_ = 10, lives_ = kLives, steps_ = 0;
  bool done_ = false;
};

// ---- preprocessing ---------------------------------------------------------

// Luma (ITU-R 601, integer weights 299/587/114) scaled to [0, 1], bilinear
// resize to 110x84 with pixel centers at half-integers (no corner alignment,
// edge clamped), center crop of rows 13..96, then (x - 0.5) / 0.5.
Tensor preprocess_frame(const RawFrame& frame);

class FrameStack {
 public:
  explicit FrameStack(std::size_t frames);

  // Fills every slot with the given frame [84, 84] and returns the stack.
  Tensor reset(const Tensor& frame);
  // Drops the oldest frame, appends the newest at index F-1.
  Tensor push(const Tensor& frame);
  // [F, 84, 84]
  Tensor state() const;

  std::size_t frames() const { return frames_; }

 private:
  std::size_t frames_;
  std::vector<double> data_;
  bool ready_ = false;
};

// Binary PPM (P6).
void write_ppm(const std::filesystem::path& path, const RawFrame& frame);

}  // namespace qforge
