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
#include <cmath>
#include <fstream>

#include "qforge/envs.hpp"

namespace qforge {

namespace {

// Source coordinate and blend weight for one output index.
struct Tap {
  std::size_t lo, hi;
  double w;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale_factor = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * scale_factor - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    t[i] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
  }
  return t;
}

}  // namespace

Tensor preprocess_frame(const RawFrame& frame) {
  const std::size_t h = frame.height, w = frame.width;
  if (h == 0 || w == 0 || frame.rgb.size() != h * w * 3)
    throw DimensionError("preprocess_frame: malformed frame");

  std::vector<double> gray(h * w);
  for (std::size_t i = 0; i < h * w; ++i) {
    const int luma = 299 * frame.rgb[3 * i] + 587 * frame.rgb[3 * i + 1] + 114 * frame.rgb[3 * i + 2];
    gray[i] = static_cast<double>(luma) / 255000.0;
  }

  const auto ty = taps(h, kResizeHeight);
  const auto tx = taps(w, kFrameSide);
  const std::size_t top = (kResizeHeight - kFrameSide) / 2;
  std::vector<double> out(kFrameSide * kFrameSide);
  for (std::size_t oy = 0; oy < kFrameSide; ++oy) {
    const Tap& ry = ty[top + oy];
    for (std::size_t ox = 0; ox < kFrameSide; ++ox) {
      const Tap& rx = tx[ox];
      const double a = gray[ry.lo * w + rx.lo], b = gray[ry.lo * w + rx.hi];
      const double c = gray[ry.hi * w + rx.lo], d = gray[ry.hi * w + rx.hi];
      const double upper = a + rx.w * (b - a);
      const double lower = c + rx.w * (d - c);
      const double v = upper + ry.w * (lower - upper);
      out[oy * kFrameSide + ox] = (v - 0.5) / 0.5;
    }
  }
  return Tensor::from(Shape{kFrameSide, kFrameSide}, std::move(out));
}

FrameStack::FrameStack(std::size_t frames) : frames_(frames) {
  if (frames == 0) throw ConfigError("FrameStack: need at least one frame");
  data_.assign(frames * kFrameSide * kFrameSide, 0.0);
}

namespace {

void check_frame(const Tensor& frame) {
  if (frame.shape() != Shape{kFrameSide, kFrameSide})
    throw DimensionError("FrameStack: expected [84, 84] frame, got " + frame.shape().str());
}

}  // namespace

Tensor FrameStack::reset(const Tensor& frame) {
  check_frame(frame);
  const std::size_t n = kFrameSide * kFrameSide;
  for (std::size_t f = 0; f < frames_; ++f)
    std::copy(frame.values().begin(), frame.values().end(),
              data_.begin() + static_cast<std::ptrdiff_t>(f * n));
  ready_ = true;
  return state();
}

Tensor FrameStack::push(const Tensor& frame) {
  check_frame(frame);
  if (!ready_) return reset(frame);
  const std::size_t n = kFrameSide * kFrameSide;
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(n), data_.end(), data_.begin());
  std::copy(frame.values().begin(), frame.values().end(),
            data_.end() - static_cast<std::ptrdiff_t>(n));
  return state();
}

Tensor FrameStack::state() const {
  return Tensor::from(Shape{frames_, kFrameSide, kFrameSide}, data_);
}

void write_ppm(const std::filesystem::path& path, const RawFrame& frame) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_ppm: cannot open " + path.string());
  out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.rgb.data()),
            static_cast<std::streamsize>(frame.rgb.size()));
}

}  // namespace qforge
