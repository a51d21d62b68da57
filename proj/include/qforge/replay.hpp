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

// Experience replay. ReplayBuffer stores single transitions; SequenceReplay
// stores fixed-length windows as one slot each. Both are FIFO rings that
// sample uniformly with replacement. Storage grows on demand up to capacity,
// so large nominal capacities cost nothing until filled.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "qforge/rng.hpp"
#include "qforge/tensor.hpp"

namespace qforge {

class NotReadyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Transition {
  Tensor state;  // state_shape
  std::int64_t action = 0;
  double reward = 0.0;
  Tensor next_state;
  bool done = false;
};

struct TransitionBatch {
  Tensor states;  // [k, state_shape...]
  std::vector<std::int64_t> actions;
  Tensor rewards;  // [k]
  Tensor next_states;
  Tensor dones;  // [k], 0 or 1
};

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Shape state_shape, std::size_t action_count);

  void add(std::span<const double> state, std::int64_t action, double reward,
           std::span<const double> next_state, bool done);
  void add(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Shape& state_shape() const { return state_shape_; }
  std::size_t action_count() const { return action_count_; }

  // i-th stored transition, oldest first.
  Transition at(std::size_t i) const;

  // k independent uniform draws with replacement. Throws NotReadyError if
  // fewer than k transitions are stored, or if the buffer is empty when
  // allow_small is set.
  TransitionBatch sample(std::size_t k, Rng& rng, bool allow_small = false) const;

  // Snapshot: "QFGRPLY\0", u32 version, u64 manifest length, JSON manifest,
  // then size() records oldest first, each: state f64[], action i64,
  // reward f64, next_state f64[], done u8. Little-endian.
  void save(const std::filesystem::path& path) const;
  static ReplayBuffer load(const std::filesystem::path& path);

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }
  void gather(std::size_t slot, TransitionBatch& batch, std::size_t row) const;

  std::size_t capacity_;
  Shape state_shape_;
  std::size_t state_size_;
  std::size_t action_count_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // slot of the oldest entry once full
  std::vector<double> states_, next_states_, rewards_;
  std::vector<std::int64_t> actions_;
  std::vector<std::uint8_t> dones_;
};

struct SequenceRecord {
  Tensor states;  // [L, state_shape...]
  std::vector<std::int64_t> actions;
  std::vector<double> rewards;
  Tensor next_states;
  std::vector<std::uint8_t> dones;  // each 0 or 1
};

struct SequenceBatch {
  std::size_t batch = 0;
  std::size_t length = 0;
  Tensor states;                      // [B, L, state_shape...]
  std::vector<std::int64_t> actions;  // B * L, row-major
  Tensor rewards;                     // [B, L]
  Tensor next_states;
  Tensor dones;  // [B, L]
};

class SequenceReplay {
 public:
  SequenceReplay(std::size_t capacity, Shape state_shape, std::size_t batch_size,
                 std::size_t length, std::size_t action_count);

  void add(const SequenceRecord& r);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t length() const { return length_; }
  std::size_t batch_size() const { return batch_; }

  SequenceRecord at(std::size_t i) const;

  // batch_size() draws with replacement; NotReadyError if fewer stored
  // (or none, with allow_small).
  SequenceBatch sample(Rng& rng, bool allow_small = false) const;

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

  std::size_t capacity_;
  Shape state_shape_;
  std::size_t state_size_;
  std::size_t batch_;
  std::size_t length_;
  std::size_t action_count_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  std::vector<double> states_, next_states_, rewards_;
  std::vector<std::int64_t> actions_;
  std::vector<std::uint8_t> dones_;
};

}  // namespace qforge
