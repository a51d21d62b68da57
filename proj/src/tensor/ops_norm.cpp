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

#include "ops_internal.hpp"
#include "qforge/ops.hpp"

namespace qforge {

using detail::input_grad;
using detail::input_values;
using detail::make_result;
using detail::Node;
using detail::require;

Tensor softmax(const Tensor& x, int axis) {
  const Shape& s = x.shape();
  const int rank = static_cast<int>(s.rank());
  const int ax = axis < 0 ? rank + axis : axis;
  require(rank >= 1 && ax >= 0 && ax < rank,
          "softmax: axis " + std::to_string(axis) + " invalid for " + s.str());
  const std::size_t outer = s.span(0, static_cast<std::size_t>(ax));
  const std::size_t n = s[static_cast<std::size_t>(ax)];
  const std::size_t inner = s.span(static_cast<std::size_t>(ax) + 1, s.rank());
  const auto in = x.values();
  for (double v : in)
    if (!std::isfinite(v)) throw NumericError("softmax: non-finite input");

  std::vector<double> out(in.size());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * n * inner + i;
      double mx = in[base];
      for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, in[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(in[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= total;
    }
  return make_result(s, std::move(out), "softmax", {x}, [outer, n, inner](Node& self) {
    auto g = input_grad(self, 0);
    if (g.empty()) return;
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t base = o * n * inner + i;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          dot += self.grad[base + j * inner] * self.values[base + j * inner];
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t k = base + j * inner;
          g[k] += self.values[k] * (self.grad[k] - dot);
        }
      }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  const Shape& s = x.shape();
  require(s.rank() >= 1, "layer_norm: scalar input");
  const std::size_t d = s.back();
  require(gain.shape() == Shape{d} && shift.shape() == Shape{d},
          "layer_norm: gain " + gain.shape().str() + " / shift " + shift.shape().str() +
              " do not match " + s.str());
  const std::size_t rows = s.numel() / d;
  const auto in = x.values();
  const auto vg = gain.values();
  const auto vs = shift.values();
  std::vector<double> xhat(in.size());
  std::vector<double> rstd(rows);
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * rstd[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * vg[j] + vs[j];
    }
  }
  return make_result(
      s, std::move(out), "layer_norm", {x, gain, shift},
      [rows, d, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
        auto gx = input_grad(self, 0);
        auto gg = input_grad(self, 1);
        auto gs = input_grad(self, 2);
        const auto& vg = input_values(self, 1);
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* g = self.grad.data() + r * d;
          const double* h = xhat.data() + r * d;
          if (!gg.empty())
            for (std::size_t j = 0; j < d; ++j) gg[j] += g[j] * h[j];
          if (!gs.empty())
            for (std::size_t j = 0; j < d; ++j) gs[j] += g[j];
          if (gx.empty()) continue;
          double mean_gh = 0.0, mean_ghh = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double gh = g[j] * vg[j];
            mean_gh += gh;
            mean_ghh += gh * h[j];
          }
          mean_gh *= inv_d;
          mean_ghh *= inv_d;
          for (std::size_t j = 0; j < d; ++j)
            gx[r * d + j] += rstd[r] * (g[j] * vg[j] - mean_gh - h[j] * mean_ghh);
        }
      });
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  BatchNormStats& stats, bool training) {
  const Shape& s = x.shape();
  require(s.rank() == 4, "batch_norm: expected [B,C,H,W], got " + s.str());
  const std::size_t batch = s[0], channels = s[1], plane = s[2] * s[3];
  require(gamma.shape() == Shape{channels} && beta.shape() == Shape{channels} &&
              stats.running_mean.shape() == Shape{channels} &&
              stats.running_var.shape() == Shape{channels},
          "batch_norm: parameters do not match " + s.str());
  if (training && batch < 2)
    throw DimensionError("batch_norm: training mode needs batch >= 2, got " + s.str());

  const auto in = x.values();
  const auto vg = gamma.values();
  const auto vb = beta.values();
  const double count = static_cast<double>(batch * plane);
  std::vector<double> xhat(in.size());
  std::vector<double> rstd(channels);
  std::vector<double> out(in.size());
  auto rm = stats.running_mean.mutable_values();
  auto rv = stats.running_var.mutable_values();

  for (std::size_t c = 0; c < channels; ++c) {
    double mu, var;
    if (training) {
      mu = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* p = in.data() + (b * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) mu += p[i];
      }
      mu /= count;
      var = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* p = in.data() + (b * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) var += (p[i] - mu) * (p[i] - mu);
      }
      var /= count;
      rm[c] = (1.0 - stats.momentum) * rm[c] + stats.momentum * mu;
      rv[c] = (1.0 - stats.momentum) * rv[c] + stats.momentum * var * count / (count - 1.0);
    } else {
      mu = rm[c];
      var = rv[c];
    }
    rstd[c] = 1.0 / std::sqrt(var + stats.eps);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t base = (b * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const double h = (in[base + i] - mu) * rstd[c];
        xhat[base + i] = h;
        out[base + i] = h * vg[c] + vb[c];
      }
    }
  }

  return make_result(
      s, std::move(out), "batch_norm", {x, gamma, beta},
      [batch, channels, plane, training, xhat = std::move(xhat),
       rstd = std::move(rstd)](Node& self) {
        auto gx = input_grad(self, 0);
        auto gg = input_grad(self, 1);
        auto gb = input_grad(self, 2);
        const auto& vg = input_values(self, 1);
        const double count = static_cast<double>(batch * plane);
        for (std::size_t c = 0; c < channels; ++c) {
          double sum_g = 0.0, sum_gh = 0.0;
          for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t base = (b * channels + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              sum_g += self.grad[base + i];
              sum_gh += self.grad[base + i] * xhat[base + i];
            }
          }
          if (!gg.empty()) gg[c] += sum_gh;
          if (!gb.empty()) gb[c] += sum_g;
          if (gx.empty()) continue;
          const double k = vg[c] * rstd[c];
          const double mean_g = sum_g / count;
          const double mean_gh = sum_gh / count;
          for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t base = (b * channels + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              const double g = self.grad[base + i];
              gx[base + i] += training ? k * (g - mean_g - xhat[base + i] * mean_gh) : k * g;
            }
          }
        }
      });
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  const auto in = x.values();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(in.size());
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    out[i] = in[i] * mask[i];
  }
  return make_result(x.shape(), std::move(out), "dropout", {x},
                     [mask = std::move(mask)](Node& self) {
                       auto g = input_grad(self, 0);
                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
                     });
}

}  // namespace qforge
