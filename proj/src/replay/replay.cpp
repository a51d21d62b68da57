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

#include "qforge/replay.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "util/binary_io.hpp"

namespace qforge {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'Q', 'F', 'G', 'R', 'P', 'L', 'Y', '\0'};
constexpr std::uint32_t kSnapshotVersion = 1;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check_action(std::int64_t action, std::size_t count) {
  if (action < 0 || static_cast<std::size_t>(action) >= count)
    throw std::out_of_range("replay: action " + std::to_string(action) + " outside [0, " +
                            std::to_string(count) + ")");
}

// Writes src into slot `index` of a flat store of fixed-size records,
// appending when the store has not yet grown that far.
template <typename T>
void put_record(std::vector<T>& store, std::size_t index, std::span<const T> src) {
  const std::size_t n = src.size();
  if (store.size() < (index + 1) * n) store.resize((index + 1) * n);
  std::copy(src.begin(), src.end(), store.begin() + static_cast<std::ptrdiff_t>(index * n));
}

Shape with_leading(std::size_t lead, const Shape& s) {
  std::vector<std::size_t> dims{lead};
  dims.insert(dims.end(), s.dims().begin(), s.dims().end());
  return Shape(std::move(dims));
}

Shape with_leading(std::size_t a, std::size_t b, const Shape& s) {
  std::vector<std::size_t> dims{a, b};
  dims.insert(dims.end(), s.dims().begin(), s.dims().end());
  return Shape(std::move(dims));
}

}  // namespace

// ---- ReplayBuffer ------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity, Shape state_shape, std::size_t action_count)
    : capacity_(capacity),
      state_shape_(std::move(state_shape)),
      state_size_(state_shape_.numel()),
      action_count_(action_count) {
  if (capacity == 0) throw ConfigError("replay: capacity must be positive");
  if (action_count == 0) throw ConfigError("replay: action count must be positive");
}

void ReplayBuffer::add(std::span<const double> state, std::int64_t action, double reward,
                       std::span<const double> next_state, bool done) {
  if (state.size() != state_size_ || next_state.size() != state_size_)
    throw DimensionError("replay: state of " + std::to_string(state.size()) + " / " +
                         std::to_string(next_state.size()) + " values, expected " +
                         state_shape_.str());
  check_action(action, action_count_);
  const std::size_t index = size_ < capacity_ ? size_ : head_;
  put_record(states_, index, state);
  put_record(next_states_, index, next_state);
  put_record(rewards_, index, std::span<const double>(&reward, 1));
  put_record(actions_, index, std::span<const std::int64_t>(&action, 1));
  const std::uint8_t d = done ? 1 : 0;
  put_record(dones_, index, std::span<const std::uint8_t>(&d, 1));
  if (size_ < capacity_) {
    ++size_;
  } else {
    head_ = (head_ + 1) % capacity_;
  }
}

void ReplayBuffer::add(const Transition& t) {
  if (t.state.shape() != state_shape_ || t.next_state.shape() != state_shape_)
    throw DimensionError("replay: transition shapes " + t.state.shape().str() + " / " +
                         t.next_state.shape().str() + " do not match " + state_shape_.str());
  add(t.state.values(), t.action, t.reward, t.next_state.values(), t.done);
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay: index out of range");
  const std::size_t s = slot(i);
  const auto first = states_.begin() + static_cast<std::ptrdiff_t>(s * state_size_);
  const auto next = next_states_.begin() + static_cast<std::ptrdiff_t>(s * state_size_);
  return {Tensor::from(state_shape_, {first, first + static_cast<std::ptrdiff_t>(state_size_)}),
          actions_[s], rewards_[s],
          Tensor::from(state_shape_, {next, next + static_cast<std::ptrdiff_t>(state_size_)}),
          dones_[s] != 0};
}

TransitionBatch ReplayBuffer::sample(std::size_t k, Rng& rng, bool allow_small) const {
  if (k == 0) throw ConfigError("replay: batch size must be positive");
  if (size_ < (allow_small ? 1 : k))
    throw NotReadyError("replay: " + std::to_string(size_) + " transitions stored, need " +
                        std::to_string(k));
  std::vector<double> states(k * state_size_), next(k * state_size_), rewards(k), dones(k);
  std::vector<std::int64_t> actions(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t s = slot(static_cast<std::size_t>(rng.uniform_int(size_)));
    std::copy_n(states_.begin() + static_cast<std::ptrdiff_t>(s * state_size_), state_size_,
                states.begin() + static_cast<std::ptrdiff_t>(r * state_size_));
    std::copy_n(next_states_.begin() + static_cast<std::ptrdiff_t>(s * state_size_), state_size_,
                next.begin() + static_cast<std::ptrdiff_t>(r * state_size_));
    actions[r] = actions_[s];
    rewards[r] = rewards_[s];
    dones[r] = dones_[s];
  }
  const Shape batch_shape = with_leading(k, state_shape_);
  return {Tensor::from(batch_shape, std::move(states)), std::move(actions),
          Tensor::from(Shape{k}, std::move(rewards)), Tensor::from(batch_shape, std::move(next)),
          Tensor::from(Shape{k}, std::move(dones))};
}

void ReplayBuffer::save(const std::filesystem::path& path) const {
  const json manifest{{"kind", "uniform"},
                      {"capacity", capacity_},
                      {"state_shape", state_shape_.dims()},
                      {"action_count", action_count_},
                      {"size", size_}};
  const std::string text = manifest.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("replay: cannot write " + path.string());
  out.write(kMagic, 8);
  io::put_le<std::uint32_t>(out, kSnapshotVersion);
  io::put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t s = slot(i);
    for (std::size_t j = 0; j < state_size_; ++j) io::put_le(out, states_[s * state_size_ + j]);
    io::put_le(out, actions_[s]);
    io::put_le(out, rewards_[s]);
    for (std::size_t j = 0; j < state_size_; ++j)
      io::put_le(out, next_states_[s * state_size_ + j]);
    io::put_le(out, dones_[s]);
  }
  if (!out) throw std::runtime_error("replay: failed writing " + path.string());
}

ReplayBuffer ReplayBuffer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("replay: cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
    throw std::runtime_error("replay: " + path.string() + " is not a replay snapshot");
  auto get_u32 = [&] { return io::get_le<std::uint32_t, SnapshotError>(in, "header"); };
  auto get_u64 = [&] { return io::get_le<std::uint64_t, SnapshotError>(in, "header"); };
  if (get_u32() != kSnapshotVersion) throw std::runtime_error("replay: unsupported version");
  std::string text(get_u64(), '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(text.size())))
    throw std::runtime_error("replay: truncated manifest");
  const json m = json::parse(text);
  ReplayBuffer buf(m.at("capacity").get<std::size_t>(),
                   Shape(m.at("state_shape").get<std::vector<std::size_t>>()),
                   m.at("action_count").get<std::size_t>());
  const auto count = m.at("size").get<std::size_t>();
  std::vector<double> state(buf.state_size_), next(buf.state_size_);
  for (std::size_t i = 0; i < count; ++i) {
    for (double& v : state) v = io::get_le<double, SnapshotError>(in, "state");
    const auto action = io::get_le<std::int64_t, SnapshotError>(in, "action");
    const auto reward = io::get_le<double, SnapshotError>(in, "reward");
    for (double& v : next) v = io::get_le<double, SnapshotError>(in, "next_state");
    const auto done = io::get_le<std::uint8_t, SnapshotError>(in, "done");
    buf.add(state, action, reward, next, done != 0);
  }
  return buf;
}

// ---- SequenceReplay ----------------------------------------------------------

SequenceReplay::SequenceReplay(std::size_t capacity, Shape state_shape, std::size_t batch_size,
                               std::size_t length, std::size_t action_count)
    : capacity_(capacity),
      state_shape_(std::move(state_shape)),
      state_size_(state_shape_.numel()),
      batch_(batch_size),
      length_(length),
      action_count_(action_count) {
  if (batch_size == 0 || capacity < batch_size)
    throw ConfigError("sequence replay: need capacity >= batch >= 1");
  if (length == 0) throw ConfigError("sequence replay: sequence length must be positive");
}

void SequenceReplay::add(const SequenceRecord& r) {
  const Shape expect = with_leading(length_, state_shape_);
  if (r.states.shape() != expect || r.next_states.shape() != expect ||
      r.actions.size() != length_ || r.rewards.size() != length_ || r.dones.size() != length_)
    throw DimensionError("sequence replay: input tensors must share leading extent " +
                         std::to_string(length_) + " with states " + expect.str() + "; got " +
                         r.states.shape().str() + ", actions " + std::to_string(r.actions.size()) +
                         ", rewards " + std::to_string(r.rewards.size()) + ", next_states " +
                         r.next_states.shape().str() + ", dones " + std::to_string(r.dones.size()));
  for (auto a : r.actions) check_action(a, action_count_);
  for (auto d : r.dones)
    if (d > 1) throw std::invalid_argument("sequence replay: dones must be 0 or 1");

  const std::size_t index = size_ < capacity_ ? size_ : head_;
  put_record(states_, index, r.states.values());
  put_record(next_states_, index, r.next_states.values());
  put_record(rewards_, index, std::span<const double>(r.rewards));
  put_record(actions_, index, std::span<const std::int64_t>(r.actions));
  put_record(dones_, index, std::span<const std::uint8_t>(r.dones));
  if (size_ < capacity_) {
    ++size_;
  } else {
    head_ = (head_ + 1) % capacity_;
  }
}

SequenceRecord SequenceReplay::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("sequence replay: index out of range");
  const std::size_t s = slot(i);
  const std::size_t n = length_ * state_size_;
  auto span_of = [&](const auto& store, std::size_t per) {
    const auto first = store.begin() + static_cast<std::ptrdiff_t>(s * per);
    return std::vector(first, first + static_cast<std::ptrdiff_t>(per));
  };
  const Shape shape = with_leading(length_, state_shape_);
  return {Tensor::from(shape, span_of(states_, n)), span_of(actions_, length_),
          span_of(rewards_, length_), Tensor::from(shape, span_of(next_states_, n)),
          span_of(dones_, length_)};
}

SequenceBatch SequenceReplay::sample(Rng& rng, bool allow_small) const {
  if (size_ < (allow_small ? 1 : batch_))
    throw NotReadyError("sequence replay: " + std::to_string(size_) + " sequences stored, need " +
                        std::to_string(batch_));
  const std::size_t n = length_ * state_size_;
  std::vector<double> states(batch_ * n), next(batch_ * n), rewards(batch_ * length_),
      dones(batch_ * length_);
  std::vector<std::int64_t> actions(batch_ * length_);
  for (std::size_t b = 0; b < batch_; ++b) {
    const std::size_t s = slot(static_cast<std::size_t>(rng.uniform_int(size_)));
    std::copy_n(states_.begin() + static_cast<std::ptrdiff_t>(s * n), n,
                states.begin() + static_cast<std::ptrdiff_t>(b * n));
    std::copy_n(next_states_.begin() + static_cast<std::ptrdiff_t>(s * n), n,
                next.begin() + static_cast<std::ptrdiff_t>(b * n));
    for (std::size_t t = 0; t < length_; ++t) {
      actions[b * length_ + t] = actions_[s * length_ + t];
      rewards[b * length_ + t] = rewards_[s * length_ + t];
      dones[b * length_ + t] = dones_[s * length_ + t];
    }
  }
  const Shape shape = with_leading(batch_, length_, state_shape_);
  return {batch_,
          length_,
          Tensor::from(shape, std::move(states)),
          std::move(actions),
          Tensor::from(Shape{batch_, length_}, std::move(rewards)),
          Tensor::from(shape, std::move(next)),
          Tensor::from(Shape{batch_, length_}, std::move(dones))};
}

}  // namespace qforge
