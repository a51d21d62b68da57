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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qforge/kernels/kernels.hpp"
#include "qforge/rng.hpp"

namespace qforge {
namespace {

std::vector<const kernels::KernelTable*> simd_tables() {
  std::vector<const kernels::KernelTable*> out;
  if (auto* t = kernels::avx2_table()) out.push_back(t);
  if (auto* t = kernels::neon_table()) out.push_back(t);
  return out;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

struct GemmCase {
  bool ta, tb;
  std::size_t m, n, k;
  double beta;
};

// Runs one gemm through `table` with padded leading dimensions.
std::vector<double> run_gemm(const kernels::KernelTable& table, const GemmCase& c,
                             const std::vector<double>& a, std::size_t lda,
                             const std::vector<double>& b, std::size_t ldb,
                             std::vector<double> cmat, std::size_t ldc) {
  table.gemm(c.ta, c.tb, c.m, c.n, c.k, a.data(), lda, b.data(), ldb, c.beta, cmat.data(), ldc);
  return cmat;
}

TEST_CASE("scalar gemm matches hand products") {
  const auto& k = kernels::scalar_table();
  const std::vector<double> a{1, 2};
  const std::vector<double> b{3, 4};
  double c = 0.0;
  k.gemm(false, false, 1, 1, 2, a.data(), 2, b.data(), 1, 0.0, &c, 1);
  CHECK(c == 11.0);
}

TEST_CASE("active table is one of the compiled variants") {
  const auto& active = kernels::active();
  CHECK((active.isa == kernels::Isa::kScalar || active.isa == kernels::Isa::kAvx2 ||
         active.isa == kernels::Isa::kNeon));
  CHECK(kernels::isa_name(active.isa) == active.name);
}

TEST_CASE("simd gemm is equivalent to the scalar reference") {
  const auto tables = simd_tables();
  if (tables.empty()) {
    MESSAGE("no SIMD variant on this machine; equivalence test skipped");
    return;
  }
  Rng rng(7);
  std::vector<GemmCase> cases;
  for (std::size_t m : {1, 3, 4, 5, 17, 130})
    for (std::size_t n : {1, 7, 8, 9, 33, 1030})
      for (std::size_t k : {1, 2, 31, 257})
        cases.push_back({false, false, m, n, k, 0.0});
  for (bool ta : {false, true})
    for (bool tb : {false, true})
      for (double beta : {0.0, 1.0, -0.5}) cases.push_back({ta, tb, 37, 45, 300, beta});
  cases.push_back({false, false, 0, 5, 3, 0.0});
  cases.push_back({false, false, 4, 8, 0, 0.5});

  for (const auto* table : tables) {
    for (const auto& c : cases) {
      const std::size_t a_rows = c.ta ? c.k : c.m, a_cols = c.ta ? c.m : c.k;
      const std::size_t b_rows = c.tb ? c.n : c.k, b_cols = c.tb ? c.k : c.n;
      const std::size_t lda = a_cols + 3, ldb = b_cols + 1, ldc = c.n + 2;
      const auto a = random_vec(std::max<std::size_t>(a_rows * lda, 1), rng);
      const auto b = random_vec(std::max<std::size_t>(b_rows * ldb, 1), rng);
      const auto c0 = random_vec(std::max<std::size_t>(c.m * ldc, 1), rng);
      const auto ref = run_gemm(kernels::scalar_table(), c, a, lda, b, ldb, c0, ldc);
      const auto got = run_gemm(*table, c, a, lda, b, ldb, c0, ldc);
      CAPTURE(table->name);
      CAPTURE(c.m);
      CAPTURE(c.n);
      CAPTURE(c.k);
      CAPTURE(c.ta);
      CAPTURE(c.tb);
      double worst = 0.0;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        // Padding columns must be untouched.
        if (c.m && (i % ldc) >= c.n) {
          REQUIRE(got[i] == c0[i]);
          continue;
        }
        worst = std::max(worst, std::abs(ref[i] - got[i]));
      }
      // Summation order differs; bound by k * eps * max|a||b| with slack.
      CHECK(worst <= 1e-13 * static_cast<double>(c.k + 1));
    }
  }
}

TEST_CASE("simd vector kernels are equivalent to the scalar reference") {
  const auto tables = simd_tables();
  Rng rng(11);
  const auto& ref = kernels::scalar_table();
  for (const auto* table : tables) {
    for (std::size_t n : {0, 1, 3, 4, 7, 8, 9, 64, 1001}) {
      const auto x = random_vec(n + 1, rng);
      const auto y = random_vec(n + 1, rng);
      CHECK(std::abs(table->dot(n, x.data(), y.data()) - ref.dot(n, x.data(), y.data())) <=
            1e-13 * static_cast<double>(n + 1));
      CHECK(std::abs(table->sum(n, x.data()) - ref.sum(n, x.data())) <=
            1e-13 * static_cast<double>(n + 1));
      auto y1 = y, y2 = y;
      table->axpy(n, 0.37, x.data(), y1.data());
      ref.axpy(n, 0.37, x.data(), y2.data());
      for (std::size_t i = 0; i <= n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15);
    }
  }
}

TEST_CASE("select pins the active variant") {
  const auto& before = kernels::active();
  kernels::select(kernels::Isa::kScalar);
  CHECK(kernels::active().isa == kernels::Isa::kScalar);
  kernels::select(before.isa);
  CHECK(kernels::active().isa == before.isa);
  if (!kernels::neon_table()) CHECK_THROWS_AS(kernels::select(kernels::Isa::kNeon), std::invalid_argument);
}

}  // namespace
}  // namespace qforge
