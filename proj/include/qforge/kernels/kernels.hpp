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

// Dense fp64 inner-loop kernels. A scalar reference table is always present;
// SIMD tables (AVX2+FMA on x86-64, NEON on aarch64) are compiled when the
// toolchain supports them and chosen at runtime from CPU feature bits.
//
// All matrices are row-major. gemm computes
//   C[m x n] = op(A)[m x k] * op(B)[k x n] + beta * C
// where op(X) is X or X^T. When beta == 0, C is never read.

#include <cstddef>
#include <string_view>

namespace qforge::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

using GemmFn = void (*)(bool trans_a, bool trans_b, std::size_t m,
                        std::size_t n, std::size_t k, const double* a,
                        std::size_t lda, const double* b, std::size_t ldb,
                        double beta, double* c, std::size_t ldc);
using DotFn = double (*)(std::size_t n, const double* x, const double* y);
using AxpyFn = void (*)(std::size_t n, double alpha, const double* x,
                        double* y);
using SumFn = double (*)(std::size_t n, const double* x);

struct KernelTable {
  Isa isa;
  std::string_view name;
  GemmFn gemm;
  DotFn dot;
  AxpyFn axpy;
  SumFn sum;
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the running CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// The table used by tensor ops. Defaults to the best supported variant;
// the QFORGE_KERNELS environment variable ("scalar", "avx2", "neon") pins it.
const KernelTable& active();

// Overrides the active table for the current process. Throws
// std::invalid_argument if the requested ISA is unavailable.
void select(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace qforge::kernels
