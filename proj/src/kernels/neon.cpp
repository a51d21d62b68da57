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

// aarch64 only; NEON is architecturally guaranteed there, so no runtime probe.

#include <arm_neon.h>

#include <cstddef>

#include "kernels_internal.hpp"

namespace qforge::kernels {
namespace {

// 4x4 register tile over unpacked operands. op(A) and op(B) are read through
// strides, which keeps the variant small; gemm cost on these targets is
// dominated by the same conv/linear shapes as on x86.
void gemm_neon(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
               std::size_t k, const double* a, std::size_t lda,
               const double* b, std::size_t ldb, double beta, double* c,
               std::size_t ldc) {
  const std::size_t a_row = trans_a ? 1 : lda;
  const std::size_t a_col = trans_a ? lda : 1;
  const std::size_t b_row = trans_b ? 1 : ldb;
  const std::size_t b_col = trans_b ? ldb : 1;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t acc[4][2];
      for (auto& row : acc) row[0] = row[1] = vdupq_n_f64(0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const double* bp = b + p * b_row + j * b_col;
        double bv[4] = {bp[0], bp[b_col], bp[2 * b_col], bp[3 * b_col]};
        const float64x2_t b0 = vld1q_f64(bv);
        const float64x2_t b1 = vld1q_f64(bv + 2);
        for (std::size_t r = 0; r < 4; ++r) {
          const float64x2_t av = vdupq_n_f64(a[(i + r) * a_row + p * a_col]);
          acc[r][0] = vfmaq_f64(acc[r][0], av, b0);
          acc[r][1] = vfmaq_f64(acc[r][1], av, b1);
        }
      }
      for (std::size_t r = 0; r < 4; ++r) {
        double tile[4];
        vst1q_f64(tile, acc[r][0]);
        vst1q_f64(tile + 2, acc[r][1]);
        for (std::size_t q = 0; q < 4; ++q) {
          double& out = c[(i + r) * ldc + j + q];
          out = beta == 0.0 ? tile[q] : tile[q] + beta * out;
        }
      }
    }
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < 4; ++r) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p)
          acc += a[(i + r) * a_row + p * a_col] * b[p * b_row + j * b_col];
        double& out = c[(i + r) * ldc + j];
        out = beta == 0.0 ? acc : acc + beta * out;
      }
    }
  }
  for (; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p)
        acc += a[i * a_row + p * a_col] * b[p * b_row + j * b_col];
      double& out = c[i * ldc + j];
      out = beta == 0.0 ? acc : acc + beta * out;
    }
  }
}

double dot_neon(std::size_t n, const double* x, const double* y) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_neon(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_neon(std::size_t n, const double* x) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

}  // namespace

const KernelTable& neon_table_unchecked() {
  static const KernelTable table{Isa::kNeon, "neon", &gemm_neon,
                                 &dot_neon,  &axpy_neon, &sum_neon};
  return table;
}

}  // namespace qforge::kernels
