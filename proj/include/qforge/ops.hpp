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

// Differentiable tensor operations. Every op validates shapes up front and
// throws DimensionError naming the offending shapes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qforge/rng.hpp"
#include "qforge/tensor.hpp"

namespace qforge {

// ---- shape manipulation ----------------------------------------------------

Tensor reshape(const Tensor& x, const Shape& shape);
// Collapses axes [axis, rank) into one: [B, a, b, c] -> [B, a*b*c] for axis 1.
Tensor flatten_from(const Tensor& x, std::size_t axis);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& order);
// Swaps the last two axes.
Tensor transpose_last(const Tensor& x);
Tensor narrow(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
// Concatenates along the last axis; leading extents must agree.
Tensor concat_last(const Tensor& a, const Tensor& b);

// ---- elementwise -----------------------------------------------------------

// b.shape must equal a.shape or a trailing suffix of it (after dropping
// leading unit extents of b); b is broadcast over the remaining leading axes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// ---- linear algebra --------------------------------------------------------

// [M x K] . [K x N] -> [M x N]
Tensor matmul(const Tensor& a, const Tensor& b);
// Batched over identical leading axes: [..., M, K] . [..., K, N].
Tensor bmm(const Tensor& a, const Tensor& b);
// x[..., in] . weight[in, out] + bias[out]. bias may be undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Valid cross-correlation. input [B,C,H,W], kernel [O,C,k,k], bias [O]
// (may be undefined) -> [B,O,(H-k)/s+1,(W-k)/s+1].
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              std::size_t stride);

// Non-overlapping p x p patches with stride p; pixels past the last full
// patch are dropped. [B,F,H,W] -> [B, F*(H/p)*(W/p), p*p], patches ordered
// frame-major then row-major within the frame.
Tensor unfold_patches(const Tensor& x, std::size_t patch);

// ---- normalization ---------------------------------------------------------

// Max-subtracted softmax along `axis` (negative counts from the back).
Tensor softmax(const Tensor& x, int axis = -1);

// Normalizes over the last axis, then applies gain/shift of extent d.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift,
                  double eps = 1e-5);

struct BatchNormStats {
  Tensor running_mean;  // [C]
  Tensor running_var;   // [C], unbiased estimate
  double momentum = 0.1;
  double eps = 1e-5;
};

// Per-channel normalization of [B,C,H,W] over (B,H,W). In training mode the
// batch statistics are used (biased variance) and the running statistics are
// updated in place; in eval mode the running statistics are used.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  BatchNormStats& stats, bool training);

// Inverted dropout. Identity when rate == 0 or !training.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

// ---- reductions and losses -------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Picks x[i, index[i]] from a [N, A] tensor -> [N].
Tensor gather_last(const Tensor& x, std::span<const std::int64_t> index);
// Mean of squared error.
Tensor mse_loss(const Tensor& pred, const Tensor& target);
// Mean Huber loss: 0.5 e^2 for |e| <= delta, else delta (|e| - delta / 2).
Tensor huber_loss(const Tensor& pred, const Tensor& target, double delta);

}  // namespace qforge
