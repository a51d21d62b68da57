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

#include <numeric>

#include "ops_internal.hpp"
#include "qforge/ops.hpp"

namespace qforge {

using detail::input_grad;
using detail::make_result;
using detail::Node;
using detail::require;

Tensor reshape(const Tensor& x, const Shape& shape) {
  require(shape.numel() == x.numel(),
          "reshape: cannot view " + x.shape().str() + " as " + shape.str());
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_result(shape, std::move(out), "reshape", {x}, [](Node& self) {
    auto g = input_grad(self, 0);
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor flatten_from(const Tensor& x, std::size_t axis) {
  const Shape& s = x.shape();
  require(axis < s.rank(), "flatten_from: axis out of range for " + s.str());
  std::vector<std::size_t> dims(s.dims().begin(), s.dims().begin() + axis);
  dims.push_back(s.span(axis, s.rank()));
  return reshape(x, Shape(std::move(dims)));
}

namespace {

std::vector<std::size_t> strides_of(const Shape& s) {
  std::vector<std::size_t> st(s.rank(), 1);
  for (std::size_t i = s.rank(); i-- > 1;) st[i - 1] = st[i] * s[i];
  return st;
}

// For each output flat index, the flat index in the source.
std::vector<std::size_t> permute_map(const Shape& in, const std::vector<std::size_t>& order,
                                     Shape& out_shape) {
  const std::size_t rank = in.rank();
  std::vector<std::size_t> out_dims(rank);
  for (std::size_t i = 0; i < rank; ++i) out_dims[i] = in[order[i]];
  out_shape = Shape(out_dims);
  const auto in_strides = strides_of(in);
  std::vector<std::size_t> src_stride(rank);
  for (std::size_t i = 0; i < rank; ++i) src_stride[i] = in_strides[order[i]];

  std::vector<std::size_t> map(in.numel());
  std::vector<std::size_t> idx(rank, 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < map.size(); ++flat) {
    map[flat] = src;
    for (std::size_t ax = rank; ax-- > 0;) {
      ++idx[ax];
      src += src_stride[ax];
      if (idx[ax] < out_dims[ax]) break;
      src -= src_stride[ax] * out_dims[ax];
      idx[ax] = 0;
    }
  }
  return map;
}

}  // namespace

Tensor permute(const Tensor& x, const std::vector<std::size_t>& order) {
  const Shape& s = x.shape();
  require(order.size() == s.rank(), "permute: order size mismatch for " + s.str());
  std::vector<bool> seen(order.size(), false);
  for (std::size_t ax : order) {
    require(ax < s.rank() && !seen[ax], "permute: invalid axis order for " + s.str());
    seen[ax] = true;
  }
  Shape out_shape;
  auto map = permute_map(s, order, out_shape);
  const auto in = x.values();
  std::vector<double> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = in[map[i]];
  return make_result(out_shape, std::move(out), "permute", {x},
                     [map = std::move(map)](Node& self) {
                       auto g = input_grad(self, 0);
                       if (g.empty()) return;
                       for (std::size_t i = 0; i < map.size(); ++i) g[map[i]] += self.grad[i];
                     });
}

Tensor transpose_last(const Tensor& x) {
  const std::size_t rank = x.shape().rank();
  require(rank >= 2, "transpose_last: need rank >= 2, got " + x.shape().str());
  std::vector<std::size_t> order(rank);
  std::iota(order.begin(), order.end(), 0);
  std::swap(order[rank - 1], order[rank - 2]);
  return permute(x, order);
}

Tensor narrow(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& s = x.shape();
  require(axis < s.rank() && length >= 1 && start + length <= s[axis],
          "narrow: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
              ") invalid on axis " + std::to_string(axis) + " of " + s.str());
  const std::size_t outer = s.span(0, axis);
  const std::size_t inner = s.span(axis + 1, s.rank());
  const std::size_t extent = s[axis];
  std::vector<std::size_t> dims = s.dims();
  dims[axis] = length;
  const auto in = x.values();
  std::vector<double> out(outer * length * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t l = 0; l < length; ++l)
      for (std::size_t i = 0; i < inner; ++i)
        out[(o * length + l) * inner + i] = in[(o * extent + start + l) * inner + i];
  return make_result(Shape(dims), std::move(out), "narrow", {x},
                     [outer, inner, extent, start, length](Node& self) {
                       auto g = input_grad(self, 0);
                       if (g.empty()) return;
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t l = 0; l < length; ++l)
                           for (std::size_t i = 0; i < inner; ++i)
                             g[(o * extent + start + l) * inner + i] +=
                                 self.grad[(o * length + l) * inner + i];
                     });
}

Tensor concat_last(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  bool ok = sa.rank() == sb.rank() && sa.rank() >= 1;
  for (std::size_t i = 0; ok && i + 1 < sa.rank(); ++i) ok = sa[i] == sb[i];
  require(ok, "concat_last: incompatible shapes " + sa.str() + " and " + sb.str());
  const std::size_t da = sa.back();
  const std::size_t db = sb.back();
  const std::size_t rows = sa.numel() / da;
  std::vector<std::size_t> dims = sa.dims();
  dims.back() = da + db;
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> out(rows * (da + db));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(va.begin() + r * da, da, out.begin() + r * (da + db));
    std::copy_n(vb.begin() + r * db, db, out.begin() + r * (da + db) + da);
  }
  return make_result(Shape(dims), std::move(out), "concat_last", {a, b},
                     [rows, da, db](Node& self) {
                       auto ga = input_grad(self, 0);
                       auto gb = input_grad(self, 1);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* src = self.grad.data() + r * (da + db);
                         if (!ga.empty())
                           for (std::size_t i = 0; i < da; ++i) ga[r * da + i] += src[i];
                         if (!gb.empty())
                           for (std::size_t i = 0; i < db; ++i) gb[r * db + i] += src[da + i];
                       }
                     });
}

}  // namespace qforge
