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

#include "ops_internal.hpp"
#include "qforge/kernels/kernels.hpp"
#include "qforge/ops.hpp"

namespace qforge {

using detail::input_grad;
using detail::input_values;
using detail::make_result;
using detail::Node;
using detail::require;

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  require(sa.rank() == 2 && sb.rank() == 2 && sa[1] == sb[0],
          "matmul: cannot multiply " + sa.str() + " by " + sb.str());
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  std::vector<double> out(m * n);
  kernels::active().gemm(false, false, m, n, k, a.values().data(), k, b.values().data(), n, 0.0,
                         out.data(), n);
  return make_result(Shape{m, n}, std::move(out), "matmul", {a, b}, [m, k, n](Node& self) {
    const auto& kt = kernels::active();
    auto ga = input_grad(self, 0);
    auto gb = input_grad(self, 1);
    if (!ga.empty())
      kt.gemm(false, true, m, k, n, self.grad.data(), n, input_values(self, 1).data(), n, 1.0,
              ga.data(), k);
    if (!gb.empty())
      kt.gemm(true, false, k, n, m, input_values(self, 0).data(), k, self.grad.data(), n, 1.0,
              gb.data(), n);
  });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  bool ok = sa.rank() >= 3 && sa.rank() == sb.rank() && sa[sa.rank() - 1] == sb[sb.rank() - 2];
  for (std::size_t i = 0; ok && i + 2 < sa.rank(); ++i) ok = sa[i] == sb[i];
  require(ok, "bmm: cannot multiply " + sa.str() + " by " + sb.str());
  const std::size_t r = sa.rank();
  const std::size_t batch = sa.span(0, r - 2);
  const std::size_t m = sa[r - 2], k = sa[r - 1], n = sb[r - 1];
  std::vector<std::size_t> dims = sa.dims();
  dims.back() = n;
  std::vector<double> out(batch * m * n);
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < batch; ++i)
    kt.gemm(false, false, m, n, k, a.values().data() + i * m * k, k,
            b.values().data() + i * k * n, n, 0.0, out.data() + i * m * n, n);
  return make_result(Shape(dims), std::move(out), "bmm", {a, b}, [batch, m, k, n](Node& self) {
    const auto& kt = kernels::active();
    auto ga = input_grad(self, 0);
    auto gb = input_grad(self, 1);
    const auto& va = input_values(self, 0);
    const auto& vb = input_values(self, 1);
    for (std::size_t i = 0; i < batch; ++i) {
      const double* g = self.grad.data() + i * m * n;
      if (!ga.empty())
        kt.gemm(false, true, m, k, n, g, n, vb.data() + i * k * n, n, 1.0, ga.data() + i * m * k,
                k);
      if (!gb.empty())
        kt.gemm(true, false, k, n, m, va.data() + i * m * k, k, g, n, 1.0, gb.data() + i * k * n,
                n);
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const Shape& sx = x.shape();
  const Shape& sw = weight.shape();
  require(sw.rank() == 2 && sx.rank() >= 1 && sx.back() == sw[0],
          "linear: input " + sx.str() + " does not match weight " + sw.str());
  const std::size_t in = sw[0], out_dim = sw[1];
  if (bias.defined())
    require(bias.shape() == Shape{out_dim},
            "linear: bias " + bias.shape().str() + " does not match weight " + sw.str());
  const std::size_t rows = sx.numel() / in;
  std::vector<double> out(rows * out_dim);
  if (bias.defined()) {
    const auto vb = bias.values();
    for (std::size_t r = 0; r < rows; ++r) std::copy(vb.begin(), vb.end(), out.begin() + r * out_dim);
  }
  kernels::active().gemm(false, false, rows, out_dim, in, x.values().data(), in,
                         weight.values().data(), out_dim, bias.defined() ? 1.0 : 0.0, out.data(),
                         out_dim);
  std::vector<std::size_t> dims = sx.dims();
  dims.back() = out_dim;
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return make_result(
      Shape(dims), std::move(out), "linear", std::move(inputs),
      [rows, in, out_dim, has_bias](Node& self) {
        const auto& kt = kernels::active();
        auto gx = input_grad(self, 0);
        auto gw = input_grad(self, 1);
        if (!gx.empty())
          kt.gemm(false, true, rows, in, out_dim, self.grad.data(), out_dim,
                  input_values(self, 1).data(), out_dim, 1.0, gx.data(), in);
        if (!gw.empty())
          kt.gemm(true, false, in, out_dim, rows, input_values(self, 0).data(), in,
                  self.grad.data(), out_dim, 1.0, gw.data(), out_dim);
        if (has_bias) {
          auto gb = input_grad(self, 2);
          if (!gb.empty())
            for (std::size_t r = 0; r < rows; ++r)
              kt.axpy(out_dim, 1.0, self.grad.data() + r * out_dim, gb.data());
        }
      });
}

namespace {

struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t out_channels, kernel, stride;
  std::size_t out_h, out_w;

  std::size_t patch_len() const { return channels * kernel * kernel; }
  std::size_t out_pixels() const { return out_h * out_w; }
};

void im2col(const ConvGeometry& g, const double* image, double* cols, std::size_t ld) {
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ki = 0; ki < g.kernel; ++ki)
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        double* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * ld;
        const double* plane = image + c * g.height * g.width;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const double* src = plane + (oy * g.stride + ki) * g.width + kj;
          double* dst = row + oy * g.out_w;
          if (g.stride == 1) {
            std::copy_n(src, g.out_w, dst);
          } else {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) dst[ox] = src[ox * g.stride];
          }
        }
      }
}

void col2im_add(const ConvGeometry& g, const double* cols, std::size_t ld, double* image) {
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ki = 0; ki < g.kernel; ++ki)
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        const double* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * ld;
        double* plane = image + c * g.height * g.width;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          double* dst = plane + (oy * g.stride + ki) * g.width + kj;
          const double* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) dst[ox * g.stride] += src[ox];
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, std::size_t stride) {
  const Shape& si = input.shape();
  const Shape& sk = kernel.shape();
  require(stride >= 1, "conv2d: stride must be positive");
  require(si.rank() == 4 && sk.rank() == 4 && sk[1] == si[1] && sk[2] == sk[3],
          "conv2d: input " + si.str() + " incompatible with kernel " + sk.str());
  require(sk[2] <= si[2] && sk[3] <= si[3],
          "conv2d: kernel " + sk.str() + " larger than input " + si.str());
  ConvGeometry g{si[0], si[1], si[2], si[3], sk[0], sk[2], stride, 0, 0};
  g.out_h = (g.height - g.kernel) / stride + 1;
  g.out_w = (g.width - g.kernel) / stride + 1;
  if (bias.defined())
    require(bias.shape() == Shape{g.out_channels},
            "conv2d: bias " + bias.shape().str() + " does not match kernel " + sk.str());

  const std::size_t pixels = g.out_pixels();
  const std::size_t plen = g.patch_len();
  const std::size_t in_stride = g.channels * g.height * g.width;
  const std::size_t out_stride = g.out_channels * pixels;
  std::vector<double> out(g.batch * out_stride);
  std::vector<double> cols(plen * pixels);
  const auto& kt = kernels::active();
  const auto vin = input.values();
  const auto vk = kernel.values();
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col(g, vin.data() + b * in_stride, cols.data(), pixels);
    double* dst = out.data() + b * out_stride;
    if (bias.defined()) {
      const auto vb = bias.values();
      for (std::size_t o = 0; o < g.out_channels; ++o)
        std::fill_n(dst + o * pixels, pixels, vb[o]);
    }
    kt.gemm(false, false, g.out_channels, pixels, plen, vk.data(), plen, cols.data(), pixels,
            bias.defined() ? 1.0 : 0.0, dst, pixels);
  }

  std::vector<Tensor> inputs{input, kernel};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return make_result(
      Shape{g.batch, g.out_channels, g.out_h, g.out_w}, std::move(out), "conv2d",
      std::move(inputs), [g, has_bias](Node& self) {
        const auto& kt = kernels::active();
        auto gin = input_grad(self, 0);
        auto gk = input_grad(self, 1);
        std::span<double> gb;
        if (has_bias) gb = input_grad(self, 2);
        const auto& vin = input_values(self, 0);
        const auto& vk = input_values(self, 1);
        const std::size_t pixels = g.out_pixels();
        const std::size_t plen = g.patch_len();
        const std::size_t in_stride = g.channels * g.height * g.width;
        const std::size_t out_stride = g.out_channels * pixels;
        std::vector<double> cols(plen * pixels);
        for (std::size_t b = 0; b < g.batch; ++b) {
          const double* gout = self.grad.data() + b * out_stride;
          if (!gk.empty()) {
            im2col(g, vin.data() + b * in_stride, cols.data(), pixels);
            kt.gemm(false, true, g.out_channels, plen, pixels, gout, pixels, cols.data(), pixels,
                    1.0, gk.data(), plen);
          }
          if (!gin.empty()) {
            kt.gemm(true, false, plen, pixels, g.out_channels, vk.data(), plen, gout, pixels, 0.0,
                    cols.data(), pixels);
            col2im_add(g, cols.data(), pixels, gin.data() + b * in_stride);
          }
          if (!gb.empty())
            for (std::size_t o = 0; o < g.out_channels; ++o)
              gb[o] += kt.sum(pixels, gout + o * pixels);
        }
      });
}

Tensor unfold_patches(const Tensor& x, std::size_t patch) {
  const Shape& s = x.shape();
  require(s.rank() == 4, "unfold_patches: expected [B,F,H,W], got " + s.str());
  require(patch >= 1 && patch <= s[2] && patch <= s[3],
          "unfold_patches: patch " + std::to_string(patch) + " exceeds frame " + s.str());
  const std::size_t batch = s[0], frames = s[1], h = s[2], w = s[3];
  const std::size_t ph = h / patch, pw = w / patch;
  const std::size_t per_frame = ph * pw;
  const std::size_t plen = patch * patch;
  const std::size_t tokens = frames * per_frame;

  // Source flat index for every output element.
  std::vector<std::size_t> map(batch * tokens * plen);
  std::size_t o = 0;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t py = 0; py < ph; ++py)
        for (std::size_t px = 0; px < pw; ++px)
          for (std::size_t ky = 0; ky < patch; ++ky)
            for (std::size_t kx = 0; kx < patch; ++kx)
              map[o++] = ((b * frames + f) * h + py * patch + ky) * w + px * patch + kx;

  const auto in = x.values();
  std::vector<double> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = in[map[i]];
  return make_result(Shape{batch, tokens, plen}, std::move(out), "unfold_patches", {x},
                     [map = std::move(map)](Node& self) {
                       auto g = input_grad(self, 0);
                       if (g.empty()) return;
                       for (std::size_t i = 0; i < map.size(); ++i) g[map[i]] += self.grad[i];
                     });
}

}  // namespace qforge
