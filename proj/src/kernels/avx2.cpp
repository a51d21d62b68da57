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

// Built with -mavx2 -mfma. Everything except the table accessor lives in an
// anonymous namespace and only C library calls are used, so no inline
// function compiled for AVX2 can leak into other translation units.

#include <immintrin.h>

#include <cstddef>
#include <cstdlib>

#include "kernels_internal.hpp"

namespace qforge::kernels {
namespace {

constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 8;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 128;
constexpr std::size_t kNc = 1024;

inline std::size_t min_of(std::size_t a, std::size_t b) { return a < b ? a : b; }

struct PackBuffers {
  double* a;
  double* b;
  PackBuffers()
      : a(static_cast<double*>(std::aligned_alloc(64, kMc * kKc * sizeof(double)))),
        b(static_cast<double*>(std::aligned_alloc(64, kKc * kNc * sizeof(double)))) {}
  ~PackBuffers() {
    std::free(a);
    std::free(b);
  }
  PackBuffers(const PackBuffers&) = delete;
  PackBuffers& operator=(const PackBuffers&) = delete;
};

PackBuffers& pack_buffers() {
  thread_local PackBuffers buffers;
  return buffers;
}

// Packs rows [i0, i0+mc) x cols [p0, p0+kc) of op(A) into kMr-row panels,
// k-major inside each panel, zero-padding the last panel.
void pack_a(bool trans, const double* a, std::size_t lda, std::size_t i0,
            std::size_t p0, std::size_t mc, std::size_t kc, double* out) {
  for (std::size_t ir = 0; ir < mc; ir += kMr) {
    const std::size_t rows = min_of(kMr, mc - ir);
    double* panel = out + ir * kc;
    for (std::size_t p = 0; p < kc; ++p) {
      for (std::size_t r = 0; r < kMr; ++r) {
        double v = 0.0;
        if (r < rows) {
          const std::size_t i = i0 + ir + r;
          const std::size_t col = p0 + p;
          v = trans ? a[col * lda + i] : a[i * lda + col];
        }
        panel[p * kMr + r] = v;
      }
    }
  }
}

// Packs rows [p0, p0+kc) x cols [j0, j0+nc) of op(B) into kNr-column panels.
void pack_b(bool trans, const double* b, std::size_t ldb, std::size_t p0,
            std::size_t j0, std::size_t kc, std::size_t nc, double* out) {
  for (std::size_t jr = 0; jr < nc; jr += kNr) {
    const std::size_t cols = min_of(kNr, nc - jr);
    double* panel = out + jr * kc;
    for (std::size_t p = 0; p < kc; ++p) {
      double* dst = panel + p * kNr;
      const std::size_t row = p0 + p;
      if (!trans) {
        const double* src = b + row * ldb + j0 + jr;
        std::size_t c = 0;
        for (; c < cols; ++c) dst[c] = src[c];
        for (; c < kNr; ++c) dst[c] = 0.0;
      } else {
        std::size_t c = 0;
        for (; c < cols; ++c) dst[c] = b[(j0 + jr + c) * ldb + row];
        for (; c < kNr; ++c) dst[c] = 0.0;
      }
    }
  }
}

void micro_kernel(std::size_t kc, const double* ap, const double* bp,
                  double* c, std::size_t ldc, std::size_t mr, std::size_t nr,
                  double beta) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_load_pd(bp);
    const __m256d b1 = _mm256_load_pd(bp + 4);
    __m256d a = _mm256_broadcast_sd(ap);
    c00 = _mm256_fmadd_pd(a, b0, c00);
    c01 = _mm256_fmadd_pd(a, b1, c01);
    a = _mm256_broadcast_sd(ap + 1);
    c10 = _mm256_fmadd_pd(a, b0, c10);
    c11 = _mm256_fmadd_pd(a, b1, c11);
    a = _mm256_broadcast_sd(ap + 2);
    c20 = _mm256_fmadd_pd(a, b0, c20);
    c21 = _mm256_fmadd_pd(a, b1, c21);
    a = _mm256_broadcast_sd(ap + 3);
    c30 = _mm256_fmadd_pd(a, b0, c30);
    c31 = _mm256_fmadd_pd(a, b1, c31);
    ap += kMr;
    bp += kNr;
  }

  if (mr == kMr && nr == kNr) {
    const __m256d vbeta = _mm256_set1_pd(beta);
    __m256d acc[kMr][2] = {{c00, c01}, {c10, c11}, {c20, c21}, {c30, c31}};
    for (std::size_t i = 0; i < kMr; ++i) {
      double* row = c + i * ldc;
      if (beta == 0.0) {
        _mm256_storeu_pd(row, acc[i][0]);
        _mm256_storeu_pd(row + 4, acc[i][1]);
      } else {
        _mm256_storeu_pd(row, _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(row), acc[i][0]));
        _mm256_storeu_pd(row + 4,
                         _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(row + 4), acc[i][1]));
      }
    }
    return;
  }

  alignas(32) double tile[kMr * kNr];
  _mm256_store_pd(tile + 0, c00);
  _mm256_store_pd(tile + 4, c01);
  _mm256_store_pd(tile + 8, c10);
  _mm256_store_pd(tile + 12, c11);
  _mm256_store_pd(tile + 16, c20);
  _mm256_store_pd(tile + 20, c21);
  _mm256_store_pd(tile + 24, c30);
  _mm256_store_pd(tile + 28, c31);
  for (std::size_t i = 0; i < mr; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      double& out = c[i * ldc + j];
      const double acc = tile[i * kNr + j];
      out = beta == 0.0 ? acc : acc + beta * out;
    }
  }
}

void gemm_avx2(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
               std::size_t k, const double* a, std::size_t lda,
               const double* b, std::size_t ldb, double beta, double* c,
               std::size_t ldc) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double& out = c[i * ldc + j];
        out = beta == 0.0 ? 0.0 : beta * out;
      }
    return;
  }
  PackBuffers& buf = pack_buffers();
  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = min_of(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = min_of(kKc, k - pc);
      pack_b(trans_b, b, ldb, pc, jc, kc, nc, buf.b);
      const double beta_eff = pc == 0 ? beta : 1.0;
      for (std::size_t ic = 0; ic < m; ic += kMc) {
        const std::size_t mc = min_of(kMc, m - ic);
        pack_a(trans_a, a, lda, ic, pc, mc, kc, buf.a);
        for (std::size_t jr = 0; jr < nc; jr += kNr) {
          const std::size_t nr = min_of(kNr, nc - jr);
          for (std::size_t ir = 0; ir < mc; ir += kMr) {
            const std::size_t mr = min_of(kMr, mc - ir);
            micro_kernel(kc, buf.a + ir * kc, buf.b + jr * kc,
                         c + (ic + ir) * ldc + jc + jr, ldc, mr, nr, beta_eff);
          }
        }
      }
    }
  }
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_avx2(std::size_t n, const double* x) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{Isa::kAvx2, "avx2", &gemm_avx2,
                                 &dot_avx2,  &axpy_avx2, &sum_avx2};
  return table;
}

}  // namespace qforge::kernels
